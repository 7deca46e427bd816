#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "wiris/scene.hpp"

namespace wiris {

/// Complex effective channel H_o per (subcarrier k, antenna pair p).
/// Stored p-major: index p*K + k.
struct EffectiveChannel {
    int subcarriers = 0;
    int pairs = 0;
    std::vector<std::complex<double>> values;

    std::complex<double>& at(int k, int p) { return values[static_cast<size_t>(p) * subcarriers + k]; }
    const std::complex<double>& at(int k, int p) const {
        return values[static_cast<size_t>(p) * subcarriers + k];
    }
};

/// Amplitude-only fingerprint record for one (case, beam, repetition).
/// Amplitude layout matches EffectiveChannel: index p*K + k.
struct CsiSample {
    int case_id = 0;
    int beam_index = 0;
    int repetition = 0;
    uint64_t noise_seed = 0;
    int subcarriers = 0;
    int pairs = 0;
    std::vector<double> amplitudes;

    double at(int k, int p) const { return amplitudes[static_cast<size_t>(p) * subcarriers + k]; }
};

/// Free-space response (lambda/(4 pi d)) * exp(-j 2 pi d / lambda) between two points.
std::complex<double> path_response(const Vec3& a, const Vec3& b, double frequency_hz);

struct BlockResult {
    bool blocked = false;
    double total_loss_db = 0.0;
};

/// Intersects the 2D segment a->b against every blocker; losses of crossed
/// blockers add up.
BlockResult is_blocked(const Vec3& a, const Vec3& b, const Scene& scene);

/// Effective channel for one RIS configuration and a set of people standing
/// at 2D positions. Modeled single-bounce paths:
///   tx->rx, tx->ris_n->rx, tx->person->rx,
///   tx->person->ris_n->rx, tx->ris_n->person->rx.
/// Every leg is attenuated by blocker penetration losses; a leg passing
/// within body_radius of another person picks up 10 dB shadowing per person.
EffectiveChannel scene_channel(const Scene& scene, const RadioConfig& radio,
                               const RisConfiguration& config, const std::vector<Vec2>& people);

/// |H * sqrt(Pt) + n| with per-entry complex Gaussian noise at the radio's
/// per-subcarrier noise power. Identical seed gives an identical sample.
CsiSample add_noise(const EffectiveChannel& channel, const RadioConfig& radio, uint64_t seed);

}  // namespace wiris
