#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <complex>
#include <numbers>

#include "wiris/channel.hpp"
#include "wiris/rng.hpp"

using namespace wiris;

namespace {

constexpr double kC = 299792458.0;

/// Open 20x20 m room, small 2x2 panel, one tx/rx. No blockers by default.
Scene test_scene(int panel_rows = 2, int panel_cols = 2) {
    Scene s;
    s.room_polygon = {{-10, -10}, {10, -10}, {10, 10}, {-10, 10}};
    s.tx_positions = {{-4.0, 2.0, 1.5}};
    s.rx_positions = {{5.0, -1.0, 1.5}};
    double lambda = kC / 5.6e9;
    s.ris_panel = make_grid_panel({-9.9, 0.0, 1.5}, {1, 0, 0}, panel_rows, panel_cols,
                                  lambda / 2.0);
    s.reference_points = {{1, 1}, {2, 1}};
    return s;
}

RadioConfig test_radio(int k = 8) {
    RadioConfig r;
    r.subcarrier_count = k;
    r.tx_power_dbm = 10.0;
    return r;
}

RisConfiguration all_off(const Scene& s) {
    RisConfiguration c;
    c.amplitudes.assign(s.ris_panel.element_count(), 0.0);
    c.phases.assign(s.ris_panel.element_count(), 0.0);
    return c;
}

RisConfiguration all_on(const Scene& s) {
    RisConfiguration c;
    c.amplitudes.assign(s.ris_panel.element_count(), 1.0);
    c.phases.assign(s.ris_panel.element_count(), 0.0);
    return c;
}

}  // namespace

TEST_CASE("path_response magnitude at the unit-magnitude distance") {
    double f = 5.6e9;
    double lambda = kC / f;
    double d = lambda / (4.0 * std::numbers::pi);
    std::complex<double> g = path_response({0, 0, 0}, {d, 0, 0}, f);
    CHECK(std::abs(g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("path_response follows the 1/d law") {
    double f = 5.6e9;
    std::complex<double> g1 = path_response({0, 0, 0}, {3.0, 0, 0}, f);
    std::complex<double> g2 = path_response({0, 0, 0}, {6.0, 0, 0}, f);
    CHECK(std::abs(g1) == doctest::Approx(2.0 * std::abs(g2)).epsilon(1e-12));
}

TEST_CASE("path_response hand-evaluated magnitude at 5.6 GHz, 5 m") {
    std::complex<double> g = path_response({0, 0, 0}, {0, 5, 0}, 5.6e9);
    CHECK(std::abs(g) == doctest::Approx(8.520259212923112e-4).epsilon(1e-12));
}

TEST_CASE("path_response rejects coincident points") {
    CHECK_THROWS_AS(path_response({1, 2, 3}, {1, 2, 3}, 5.6e9), std::invalid_argument);
}

TEST_CASE("is_blocked sums losses of crossed blockers") {
    Scene s = test_scene();
    Vec3 a{-4, 0, 1.5}, b{4, 0, 1.5};
    BlockResult none = is_blocked(a, b, s);
    CHECK_FALSE(none.blocked);
    CHECK(none.total_loss_db == 0.0);

    s.blockers.push_back({{0, -1}, {0, 1}, 40.0});
    BlockResult one = is_blocked(a, b, s);
    CHECK(one.blocked);
    CHECK(one.total_loss_db == 40.0);

    s.blockers.push_back({{2, -1}, {2, 1}, 30.0});
    BlockResult two = is_blocked(a, b, s);
    CHECK(two.blocked);
    CHECK(two.total_loss_db == 70.0);

    // brute-force cross-check: both segments individually intersect
    CHECK(segments_intersect(a.xy(), b.xy(), {0, -1}, {0, 1}));
    CHECK(segments_intersect(a.xy(), b.xy(), {2, -1}, {2, 1}));
}

TEST_CASE("scene_channel with all-off RIS reproduces the direct path exactly") {
    Scene s = test_scene();
    RadioConfig radio = test_radio();
    EffectiveChannel ch = scene_channel(s, radio, all_off(s), {});
    std::vector<double> freqs = radio.subcarrier_frequencies();
    for (int k = 0; k < radio.subcarrier_count; ++k) {
        std::complex<double> d = path_response(s.tx_positions[0], s.rx_positions[0], freqs[k]);
        CHECK(ch.at(k, 0) == d);
    }
}

TEST_CASE("scene_channel single element with blocked direct is the two-leg product") {
    Scene s = test_scene(1, 1);
    // hard-block the direct path only
    s.blockers.push_back({{0.0, 0.4}, {0.0, 0.8}, std::numeric_limits<double>::infinity()});
    RadioConfig radio = test_radio(4);
    EffectiveChannel ch = scene_channel(s, radio, all_on(s), {});
    std::vector<double> freqs = radio.subcarrier_frequencies();
    const Vec3& e = s.ris_panel.element_positions[0];
    for (int k = 0; k < radio.subcarrier_count; ++k) {
        std::complex<double> want = path_response(s.tx_positions[0], e, freqs[k]) *
                                    path_response(e, s.rx_positions[0], freqs[k]);
        CHECK(std::abs(ch.at(k, 0) - want) <= 1e-15 * std::abs(want));
    }
}

TEST_CASE("scene_channel is linear in element partitions") {
    Scene s = test_scene(3, 3);
    RadioConfig radio = test_radio(6);
    Rng rng(7);
    RisConfiguration full;
    size_t m = s.ris_panel.element_count();
    for (size_t n = 0; n < m; ++n) {
        full.amplitudes.push_back(rng.uniform());
        full.phases.push_back(rng.uniform() * 2.0 * std::numbers::pi * 0.9999);
    }
    RisConfiguration part_a = full, part_b = full;
    for (size_t n = 0; n < m; ++n) {
        if (n % 2 == 0) part_a.amplitudes[n] = 0.0;
        else part_b.amplitudes[n] = 0.0;
    }
    EffectiveChannel ch_full = scene_channel(s, radio, full, {});
    EffectiveChannel ch_a = scene_channel(s, radio, part_a, {});
    EffectiveChannel ch_b = scene_channel(s, radio, part_b, {});
    EffectiveChannel direct = scene_channel(s, radio, all_off(s), {});
    for (size_t i = 0; i < ch_full.values.size(); ++i) {
        std::complex<double> lhs = ch_full.values[i] + direct.values[i];
        std::complex<double> rhs = ch_a.values[i] + ch_b.values[i];
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("distant person leaves amplitudes essentially unchanged") {
    Scene s = test_scene();
    // park the person far from every path corridor
    s.room_polygon = {{-60, -60}, {60, -60}, {60, 60}, {-60, 60}};
    RadioConfig radio = test_radio();
    EffectiveChannel base = scene_channel(s, radio, all_on(s), {});
    EffectiveChannel with_person = scene_channel(s, radio, all_on(s), {{50.0, 50.0}});
    for (size_t i = 0; i < base.values.size(); ++i) {
        double rel = std::abs(std::abs(with_person.values[i]) - std::abs(base.values[i])) /
                     std::abs(base.values[i]);
        CHECK(rel < 1e-3);
    }
}

TEST_CASE("single-path phase advances linearly across subcarriers") {
    Scene s = test_scene();
    RadioConfig radio = test_radio(16);
    EffectiveChannel ch = scene_channel(s, radio, all_off(s), {});
    double d = distance(s.tx_positions[0], s.rx_positions[0]);
    std::vector<double> freqs = radio.subcarrier_frequencies();
    for (int k = 0; k + 1 < radio.subcarrier_count; ++k) {
        double df = freqs[k + 1] - freqs[k];
        double got = std::arg(ch.at(k + 1, 0)) - std::arg(ch.at(k, 0));
        double want = -2.0 * std::numbers::pi * d * df / kC;
        double diff = std::remainder(got - want, 2.0 * std::numbers::pi);
        CHECK(std::abs(diff) < 1e-9);
    }
}

TEST_CASE("people must stand inside the room") {
    Scene s = test_scene();
    RadioConfig radio = test_radio(2);
    CHECK_THROWS_AS(scene_channel(s, radio, all_off(s), {{100.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("empty panel is rejected") {
    Scene s = test_scene();
    s.ris_panel.element_positions.clear();
    RisConfiguration empty_cfg;
    CHECK_THROWS_AS(scene_channel(s, test_radio(2), empty_cfg, {}), std::invalid_argument);
}

TEST_CASE("add_noise with zero override returns scaled magnitudes exactly") {
    Scene s = test_scene();
    RadioConfig radio = test_radio();
    radio.tx_power_dbm = 13.0;
    radio.noise_power_override_mw = 0.0;
    EffectiveChannel ch = scene_channel(s, radio, all_on(s), {});
    CsiSample sample = add_noise(ch, radio, 99);
    double scale = std::sqrt(std::pow(10.0, 13.0 / 10.0));
    for (int k = 0; k < ch.subcarriers; ++k)
        CHECK(sample.at(k, 0) == std::abs(ch.at(k, 0)) * scale);
}

TEST_CASE("add_noise is deterministic under the seed") {
    Scene s = test_scene();
    RadioConfig radio = test_radio();
    EffectiveChannel ch = scene_channel(s, radio, all_on(s), {});
    CsiSample a = add_noise(ch, radio, 1234);
    CsiSample b = add_noise(ch, radio, 1234);
    CsiSample c = add_noise(ch, radio, 1235);
    CHECK(a.amplitudes == b.amplitudes);
    CHECK(a.amplitudes != c.amplitudes);
}

TEST_CASE("empirical noise power matches the configured level within 2 percent") {
    RadioConfig radio = test_radio(10);
    EffectiveChannel zero;
    zero.subcarriers = 10;
    zero.pairs = 1;
    zero.values.assign(10, {0.0, 0.0});
    double sigma2 = radio.noise_power_mw();
    double sum = 0.0;
    int draws = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        CsiSample sample = add_noise(zero, radio, 5000 + rep);
        for (double a : sample.amplitudes) {
            sum += a * a;
            draws += 1;
        }
    }
    REQUIRE(draws == 100000);
    double mean = sum / draws;
    CHECK(std::abs(mean - sigma2) / sigma2 < 0.02);
}

TEST_CASE("reproducibility: same scene, config, people, seed gives identical samples") {
    Scene s = test_scene(3, 3);
    RadioConfig radio = test_radio();
    RisConfiguration cfg = all_on(s);
    std::vector<Vec2> people = {{1.0, 1.0}, {2.0, 1.0}};
    CsiSample a = add_noise(scene_channel(s, radio, cfg, people), radio, 77);
    CsiSample b = add_noise(scene_channel(s, radio, cfg, people), radio, 77);
    CHECK(a.amplitudes == b.amplitudes);
}
