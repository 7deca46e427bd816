#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wiris/geometry.hpp"
#include "wiris/ris.hpp"

namespace wiris {

/// OFDM radio parameters shared by every channel evaluation.
struct RadioConfig {
    double carrier_hz = 5.6e9;
    double bandwidth_hz = 20e6;
    int subcarrier_count = 52;
    double tx_power_dbm = 10.0;
    int tx_antennas = 1;
    int rx_antennas = 1;
    /// When set, replaces the thermal noise power (linear mW). Zero disables noise.
    std::optional<double> noise_power_override_mw;

    int pair_count() const { return tx_antennas * rx_antennas; }
    double wavelength_m() const;

    /// Per-subcarrier center frequencies. 312.5 kHz spacing, DC skipped for
    /// even counts (the 20 MHz Wi-Fi grid).
    std::vector<double> subcarrier_frequencies() const;

    /// Thermal noise power per subcarrier in linear mW unless overridden.
    double noise_power_mw() const;

    void validate() const;
};

struct Blocker {
    Vec2 a;
    Vec2 b;
    double loss_db = 40.0;
};

struct PersonModel {
    double scatter_gain = 0.5;
    double body_radius = 0.25;
    double height = 1.0;
};

/// Static environment: room, obstructions, radios, RIS, and the reference
/// grid people stand on.
struct Scene {
    std::vector<Vec2> room_polygon;
    std::vector<Blocker> blockers;
    std::vector<Vec3> tx_positions;
    std::vector<Vec3> rx_positions;
    RisPanel ris_panel;
    std::vector<Vec2> reference_points;
    PersonModel person_model;

    int reference_point_count() const { return static_cast<int>(reference_points.size()); }

    void validate() const;

    std::string to_json_string() const;
    static Scene from_json_string(const std::string& text);
};

/// L-shaped NLoS room used by the desk-scale runs: 6x6 m outline with the
/// 3x3 upper-right corner removed, RIS on the left wall facing the lower arm,
/// direct path shadowed by a lossy board, and a 2x2 reference grid at 1 m
/// spacing near the receiver.
Scene make_desk_scene();

}  // namespace wiris
