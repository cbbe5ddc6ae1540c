#pragma once

#include <cstddef>
#include <functional>

namespace freqadapt {

// Worker count from FREQADAPT_THREADS: unset or 1 means sequential, 0 means
// one per hardware thread.
std::size_t configured_threads();

// Runs body(i) for i in [0, n). Each index must write only its own output,
// which keeps results bitwise equal to sequential evaluation.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace freqadapt
