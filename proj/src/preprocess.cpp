#include "wiris/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wiris {

std::vector<double> maxmin_normalize(const std::vector<double>& amplitudes) {
    if (amplitudes.empty()) throw std::invalid_argument("maxmin_normalize: empty input");
    for (double a : amplitudes) {
        if (!std::isfinite(a)) throw std::invalid_argument("maxmin_normalize: non-finite input");
    }
    auto [min_it, max_it] = std::minmax_element(amplitudes.begin(), amplitudes.end());
    double lo = *min_it, hi = *max_it;
    std::vector<double> out(amplitudes.size());
    if (hi == lo) return out;  // degenerate rule: all zeros
    for (size_t i = 0; i < amplitudes.size(); ++i) out[i] = (amplitudes[i] - lo) / (hi - lo);
    return out;
}

FeatureVector concat_features(const std::vector<CsiSample>& beam_samples) {
    if (beam_samples.empty()) throw std::invalid_argument("concat_features: no samples");
    int r_beams = static_cast<int>(beam_samples.size());
    int k_sub = beam_samples[0].subcarriers;
    int p_pairs = beam_samples[0].pairs;

    std::vector<bool> seen(r_beams, false);
    for (const CsiSample& s : beam_samples) {
        if (s.subcarriers != k_sub || s.pairs != p_pairs)
            throw std::invalid_argument("concat_features: inconsistent sample dimensions");
        if (s.beam_index < 0 || s.beam_index >= r_beams || seen[s.beam_index])
            throw std::invalid_argument("concat_features: missing or duplicate (p, r) cell");
        seen[s.beam_index] = true;
    }

    FeatureVector fv;
    fv.subcarriers = k_sub;
    fv.pairs = p_pairs;
    fv.beams = r_beams;
    fv.values.assign(static_cast<size_t>(k_sub) * p_pairs * r_beams, 0.0);

    for (const CsiSample& s : beam_samples) {
        for (int p = 0; p < p_pairs; ++p) {
            std::vector<double> block(k_sub);
            for (int k = 0; k < k_sub; ++k) block[k] = s.at(k, p);
            std::vector<double> norm = maxmin_normalize(block);
            for (int k = 0; k < k_sub; ++k) fv.values[fv.index(k, p, s.beam_index)] = norm[k];
        }
    }
    return fv;
}

}  // namespace wiris
