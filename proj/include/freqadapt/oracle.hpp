#pragma once

#include <span>
#include <vector>

#include "freqadapt/cca.hpp"
#include "freqadapt/sda.hpp"
#include "freqadapt/spectral.hpp"
#include "freqadapt/tensor.hpp"

// Reference computations used only for verification. Each one follows the
// textbook definition with plain loops (extended precision where it helps)
// and shares no code path with the optimized implementation beyond the data
// types and the direct DFT.

namespace freqadapt::oracle {

// Six nested loops, explicit bounds test for zero padding.
FeatureMap conv2d_naive(const FeatureMap& input, const ConvKernel& kernel);

// Triple loop, long double accumulation.
Matrix matmul_naive(const Matrix& a, const Matrix& b);

std::vector<long double> softmax_extended(std::span<const double> row);

// softmax(Q K^T / sqrt(d_k)) V wo (+ bias), every step in long double.
Matrix attention_dense(const Matrix& xv, const Matrix& xt,
                       const cca::AttentionParams& p);

// Two-pass mean and population std in long double.
sda::StyleStats channel_stats_extended(const FeatureMap& x);

// Band energies from the direct DFT, radius measured from the centered DC
// position.
BandEnergy band_energy_direct(const FeatureMap& x, double radial_cut);

// Centered channel-averaged log1p(amplitude) from the direct DFT.
Matrix heatmap_direct(const FeatureMap& x);

// The SDA pipeline with explicit coefficients through the direct DFT.
FeatureMap sda_direct(const FeatureMap& x, const sda::AffineStyle& style);

// Per-channel amplitude standardization through the direct DFT.
FeatureMap normalize_frequency_direct(const FeatureMap& x);

// The CCA pipeline: dense attention, then direct-DFT normalization.
FeatureMap cca_direct(const FeatureMap& x, const Matrix& xt,
                      const cca::AttentionParams& p);

}  // namespace freqadapt::oracle
