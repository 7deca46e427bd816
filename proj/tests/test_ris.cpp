#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "wiris/ris.hpp"
#include "wiris/rng.hpp"
#include "wiris/scene.hpp"

using namespace wiris;

namespace {
constexpr double kWavelength = 299792458.0 / 5.6e9;

RisPanel half_wave_panel(int rows = 10, int cols = 10) {
    return make_grid_panel({0, 0, 1.5}, {1, 0, 0}, rows, cols, kWavelength / 2.0);
}
}  // namespace

TEST_CASE("steering_phase zero gradient cases") {
    CHECK(steering_phase(0.37, 0.0, 0.0, kWavelength) == doctest::Approx(0.0));
    // specular: sin(theta_r) - sin(theta_i) = 0
    CHECK(steering_phase(1.23, 10.0, 10.0, kWavelength) == doctest::Approx(0.0));
}

TEST_CASE("steering_phase hand-evaluated value") {
    // u = lambda/2, theta_r = 30: mod(-pi/2, 2pi) = 3pi/2
    double phi = steering_phase(kWavelength / 2.0, 0.0, 30.0, kWavelength);
    CHECK(phi == doctest::Approx(4.71238898038469).epsilon(1e-12));
}

TEST_CASE("steering_phase rejects bad input") {
    CHECK_THROWS_AS(steering_phase(0.0, 0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(steering_phase(std::nan(""), 0.0, 0.0, kWavelength), std::invalid_argument);
    CHECK_THROWS_AS(steering_phase(0.0, 0.0, 95.0, kWavelength), std::invalid_argument);
}

TEST_CASE("build_codebook simulation default: 9 continuous beams") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {0, 10, 20, 30, 40, 50, 60, 70, 80},
                                   Quantization::continuous, kWavelength);
    CHECK(book.beam_count() == 9);
    for (size_t i = 0; i + 1 < book.beams.size(); ++i)
        CHECK(book.beams[i].beam_label_deg < book.beams[i + 1].beam_label_deg);
}

TEST_CASE("build_codebook experiment default: 6 one-bit beams") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {10, 20, 30, 40, 50, 60}, Quantization::one_bit,
                                   kWavelength);
    CHECK(book.beam_count() == 6);
    for (const auto& beam : book.beams) {
        for (double p : beam.phases) CHECK((p == 0.0 || p == std::numbers::pi));
    }
}

TEST_CASE("build_codebook single boresight beam has zero phases") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {0.0}, Quantization::continuous, kWavelength);
    REQUIRE(book.beam_count() == 1);
    for (double p : book.beams[0].phases) CHECK(p == 0.0);
}

TEST_CASE("build_codebook rejects duplicate angles") {
    RisPanel panel = half_wave_panel();
    CHECK_THROWS_AS(build_codebook(panel, 0.0, {10, 20, 10}, Quantization::continuous,
                                   kWavelength),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_codebook(panel, 0.0, {}, Quantization::continuous, kWavelength),
                    std::invalid_argument);
}

TEST_CASE("array_gain coherent at the design angle") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {0, 10, 20, 30, 40, 50, 60, 70, 80},
                                   Quantization::continuous, kWavelength);
    for (const auto& beam : book.beams) {
        double g = array_gain(panel, beam, 0.0, beam.beam_label_deg, kWavelength);
        CHECK(std::abs(g - 1.0) < 1e-9);
    }
}

TEST_CASE("array_gain zero for all-off configuration") {
    RisPanel panel = half_wave_panel();
    RisConfiguration off;
    off.amplitudes.assign(panel.element_count(), 0.0);
    off.phases.assign(panel.element_count(), 0.0);
    CHECK(array_gain(panel, off, 0.0, 25.0, kWavelength) == 0.0);
}

TEST_CASE("array_gain brute-force sweep peaks at the steered angle") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {30.0}, Quantization::continuous, kWavelength);
    double best_gain = -1.0, best_theta = 0.0;
    for (double theta = -90.0; theta <= 90.0; theta += 0.5) {
        double g = array_gain(panel, book.beams[0], 0.0, theta, kWavelength);
        if (g > best_gain) {
            best_gain = g;
            best_theta = theta;
        }
    }
    CHECK(std::abs(best_theta - 30.0) <= 0.5);
}

TEST_CASE("one-bit beams peak within 5 degrees of the label") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {10, 20, 30, 40, 50, 60}, Quantization::one_bit,
                                   kWavelength);
    for (const auto& beam : book.beams) {
        double best_gain = -1.0, best_theta = 0.0;
        for (double theta = -90.0; theta <= 90.0; theta += 0.5) {
            double g = array_gain(panel, beam, 0.0, theta, kWavelength);
            if (g > best_gain) {
                best_gain = g;
                best_theta = theta;
            }
        }
        // 1-bit quantization mirrors power into -theta_r; accept either lobe.
        double dist = std::min(std::abs(best_theta - beam.beam_label_deg),
                               std::abs(best_theta + beam.beam_label_deg));
        CHECK(dist <= 5.0);
    }
}

TEST_CASE("one-bit quantization is idempotent") {
    RisPanel panel = half_wave_panel();
    Codebook book = build_codebook(panel, 0.0, {10, 20, 30, 40, 50, 60}, Quantization::one_bit,
                                   kWavelength);
    for (const auto& beam : book.beams) {
        RisConfiguration again = quantize_one_bit(beam);
        CHECK(again.phases == beam.phases);
        CHECK(again.amplitudes == beam.amplitudes);
    }
}

TEST_CASE("emitted phases and amplitudes stay in range for random angle sets") {
    RisPanel panel = half_wave_panel(6, 6);
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> angles;
        double a = -85.0;
        for (int i = 0; i < 5; ++i) {
            a += 1.0 + rng.uniform() * 30.0;
            if (a > 90.0) break;
            angles.push_back(a);
        }
        if (angles.empty()) continue;
        Quantization q = trial % 2 == 0 ? Quantization::continuous : Quantization::one_bit;
        Codebook book = build_codebook(panel, rng.uniform() * 20.0 - 10.0, angles, q, kWavelength);
        for (const auto& beam : book.beams) {
            for (double p : beam.phases) {
                CHECK(p >= 0.0);
                CHECK(p < 2.0 * std::numbers::pi);
            }
            for (double amp : beam.amplitudes) {
                CHECK(amp >= 0.0);
                CHECK(amp <= 1.0);
            }
        }
    }
}

TEST_CASE("codebook JSON round-trip") {
    RisPanel panel = half_wave_panel(4, 4);
    Codebook book =
        build_codebook(panel, 5.0, {10, 25, 40}, Quantization::one_bit, kWavelength);
    Codebook back = Codebook::from_json_string(book.to_json_string());
    CHECK(back.incidence_deg == book.incidence_deg);
    CHECK(back.quantization == book.quantization);
    REQUIRE(back.beam_count() == book.beam_count());
    for (size_t i = 0; i < book.beams.size(); ++i) {
        CHECK(back.beams[i].beam_label_deg == book.beams[i].beam_label_deg);
        CHECK(back.beams[i].amplitudes == book.beams[i].amplitudes);
        CHECK(back.beams[i].phases == book.beams[i].phases);
    }
}

TEST_CASE("grid panel is coplanar and sized") {
    RisPanel panel = half_wave_panel();
    CHECK(panel.element_count() == 100);
    CHECK_NOTHROW(panel.validate());
    RisPanel skew = panel;
    skew.element_positions[3].x += 1e-6;
    CHECK_THROWS_AS(skew.validate(), std::invalid_argument);
}
