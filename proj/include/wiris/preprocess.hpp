#pragma once

#include <vector>

#include "wiris/channel.hpp"

namespace wiris {

/// Model input vector H_c: max-min normalized amplitudes of one case
/// concatenated over antenna pairs and beams. Layout is p outermost,
/// r middle, k innermost: values[((p*R)+r)*K + k].
struct FeatureVector {
    int subcarriers = 0;   // K
    int pairs = 0;         // P
    int beams = 0;         // R
    std::vector<double> values;

    int length() const { return subcarriers * pairs * beams; }
    int index(int k, int p, int r) const { return (p * beams + r) * subcarriers + k; }
    double at(int k, int p, int r) const { return values[index(k, p, r)]; }
};

/// Max-min normalization over one (p, r) amplitude vector:
/// (a_k - min) / (max - min); all zeros when max == min.
std::vector<double> maxmin_normalize(const std::vector<double>& amplitudes);

/// Builds H_c from the R samples of one (case, repetition), one per beam.
/// Each sample must cover all P antenna pairs; each (p, r) block is
/// normalized independently.
FeatureVector concat_features(const std::vector<CsiSample>& beam_samples);

}  // namespace wiris
