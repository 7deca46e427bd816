#include "wiris/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wiris/rng.hpp"

namespace wiris {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPersonShadowDb = 10.0;

double db_to_amplitude(double loss_db) {
    if (std::isinf(loss_db)) return 0.0;
    return std::pow(10.0, -loss_db / 20.0);
}

/// One leg of a composite path: geometry plus frequency-independent loss.
struct Leg {
    double dist = 0.0;
    double loss_amp = 1.0;  // blocker penetration x person shadowing
};

/// A full tx->...->rx path: the per-subcarrier response is coeff times the
/// product of per-leg free-space responses, evaluated exactly like
/// path_response so a single unblocked leg reproduces it bit for bit.
struct Path {
    std::vector<double> leg_dists;
    std::complex<double> coeff{1.0, 0.0};
};

class LegFactory {
public:
    LegFactory(const Scene& scene, const std::vector<Vec2>& people)
        : scene_(scene), people_(people) {}

    /// exclude_a / exclude_b: indices of people sitting at the leg endpoints,
    /// exempt from shadowing themselves. -1 for none.
    Leg make(const Vec3& a, const Vec3& b, int exclude_a = -1, int exclude_b = -1) const {
        Leg leg;
        leg.dist = distance(a, b);
        if (leg.dist <= 0.0) throw std::invalid_argument("coincident path endpoints");
        double loss_db = 0.0;
        for (const Blocker& blk : scene_.blockers) {
            if (segments_intersect(a.xy(), b.xy(), blk.a, blk.b)) loss_db += blk.loss_db;
        }
        leg.loss_amp = db_to_amplitude(loss_db);
        double radius = scene_.person_model.body_radius;
        for (int m = 0; m < static_cast<int>(people_.size()); ++m) {
            if (m == exclude_a || m == exclude_b) continue;
            if (point_segment_distance(people_[m], a.xy(), b.xy()) < radius)
                leg.loss_amp *= db_to_amplitude(kPersonShadowDb);
        }
        return leg;
    }

private:
    const Scene& scene_;
    const std::vector<Vec2>& people_;
};

void append_path(std::vector<Path>& paths, std::complex<double> coeff,
                 std::initializer_list<Leg> legs) {
    Path p;
    p.coeff = coeff;
    for (const Leg& l : legs) {
        p.leg_dists.push_back(l.dist);
        p.coeff *= l.loss_amp;
    }
    if (std::abs(p.coeff) == 0.0) return;  // fully blocked or zero-amplitude element
    paths.push_back(std::move(p));
}

}  // namespace

std::complex<double> path_response(const Vec3& a, const Vec3& b, double frequency_hz) {
    double d = distance(a, b);
    if (d <= 0.0) throw std::invalid_argument("path_response: coincident points");
    if (frequency_hz <= 0.0) throw std::invalid_argument("path_response: frequency must be > 0");
    double lambda = kSpeedOfLight / frequency_hz;
    double mag = lambda / (4.0 * std::numbers::pi * d);
    return std::polar(mag, -2.0 * std::numbers::pi * d / lambda);
}

BlockResult is_blocked(const Vec3& a, const Vec3& b, const Scene& scene) {
    BlockResult res;
    for (const Blocker& blk : scene.blockers) {
        if (segments_intersect(a.xy(), b.xy(), blk.a, blk.b)) {
            res.blocked = true;
            res.total_loss_db += blk.loss_db;
        }
    }
    return res;
}

EffectiveChannel scene_channel(const Scene& scene, const RadioConfig& radio,
                               const RisConfiguration& config, const std::vector<Vec2>& people) {
    size_t m_elems = scene.ris_panel.element_count();
    if (m_elems == 0) throw std::invalid_argument("scene_channel: empty RIS panel");
    if (config.amplitudes.size() != m_elems || config.phases.size() != m_elems)
        throw std::invalid_argument("scene_channel: configuration does not match panel size");
    radio.validate();
    if (static_cast<int>(scene.tx_positions.size()) != radio.tx_antennas ||
        static_cast<int>(scene.rx_positions.size()) != radio.rx_antennas)
        throw std::invalid_argument("scene_channel: antenna counts do not match scene positions");
    for (const Vec2& p : people) {
        if (!point_in_polygon(p, scene.room_polygon))
            throw std::invalid_argument("scene_channel: person outside room");
    }

    std::vector<Vec3> people3;
    people3.reserve(people.size());
    for (const Vec2& p : people) people3.push_back({p.x, p.y, scene.person_model.height});

    std::vector<std::complex<double>> theta(m_elems);
    for (size_t n = 0; n < m_elems; ++n)
        theta[n] = std::polar(config.amplitudes[n], config.phases[n]);

    LegFactory legs(scene, people);
    std::complex<double> scatter{scene.person_model.scatter_gain, 0.0};

    std::vector<double> freqs = radio.subcarrier_frequencies();
    EffectiveChannel ch;
    ch.subcarriers = radio.subcarrier_count;
    ch.pairs = radio.pair_count();
    ch.values.assign(static_cast<size_t>(ch.subcarriers) * ch.pairs, {0.0, 0.0});

    for (int it = 0; it < radio.tx_antennas; ++it) {
        const Vec3& tx = scene.tx_positions[it];
        for (int ir = 0; ir < radio.rx_antennas; ++ir) {
            const Vec3& rx = scene.rx_positions[ir];
            int pair = it * radio.rx_antennas + ir;

            std::vector<Path> paths;
            paths.reserve(1 + m_elems + people.size() * (2 * m_elems + 1));

            append_path(paths, {1.0, 0.0}, {legs.make(tx, rx)});

            std::vector<Leg> tx_elem(m_elems), elem_rx(m_elems);
            for (size_t n = 0; n < m_elems; ++n) {
                const Vec3& e = scene.ris_panel.element_positions[n];
                tx_elem[n] = legs.make(tx, e);
                elem_rx[n] = legs.make(e, rx);
                append_path(paths, theta[n], {tx_elem[n], elem_rx[n]});
            }

            for (int m = 0; m < static_cast<int>(people3.size()); ++m) {
                const Vec3& person = people3[m];
                Leg tx_p = legs.make(tx, person, -1, m);
                Leg p_rx = legs.make(person, rx, m, -1);
                append_path(paths, scatter, {tx_p, p_rx});
                for (size_t n = 0; n < m_elems; ++n) {
                    const Vec3& e = scene.ris_panel.element_positions[n];
                    Leg p_elem = legs.make(person, e, m, -1);
                    append_path(paths, scatter * theta[n], {tx_p, p_elem, elem_rx[n]});
                    append_path(paths, scatter * theta[n], {tx_elem[n], p_elem, p_rx});
                }
            }

            for (int k = 0; k < ch.subcarriers; ++k) {
                double lambda = kSpeedOfLight / freqs[k];
                std::complex<double> sum{0.0, 0.0};
                for (const Path& p : paths) {
                    std::complex<double> resp = p.coeff;
                    for (double d : p.leg_dists) {
                        resp *= std::polar(lambda / (4.0 * std::numbers::pi * d),
                                           -2.0 * std::numbers::pi * d / lambda);
                    }
                    sum += resp;
                }
                ch.at(k, pair) = sum;
            }
        }
    }
    return ch;
}

CsiSample add_noise(const EffectiveChannel& channel, const RadioConfig& radio, uint64_t seed) {
    CsiSample sample;
    sample.noise_seed = seed;
    sample.subcarriers = channel.subcarriers;
    sample.pairs = channel.pairs;
    sample.amplitudes.resize(channel.values.size());

    double pt_sqrt = std::sqrt(std::pow(10.0, radio.tx_power_dbm / 10.0));
    double noise_power = radio.noise_power_mw();
    if (noise_power == 0.0) {
        for (size_t i = 0; i < channel.values.size(); ++i)
            sample.amplitudes[i] = std::abs(channel.values[i]) * pt_sqrt;
        return sample;
    }
    double sigma = std::sqrt(noise_power / 2.0);

    Rng rng(seed);
    for (int p = 0; p < channel.pairs; ++p) {
        for (int k = 0; k < channel.subcarriers; ++k) {
            double re = sigma * rng.gaussian();
            double im = sigma * rng.gaussian();
            std::complex<double> v = channel.at(k, p) * pt_sqrt + std::complex<double>{re, im};
            sample.amplitudes[static_cast<size_t>(p) * channel.subcarriers + k] = std::abs(v);
        }
    }
    return sample;
}

}  // namespace wiris
