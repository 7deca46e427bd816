#pragma once

#include <string>
#include <vector>

#include "wiris/geometry.hpp"

namespace wiris {

/// Planar reflecting surface. Elements live on the plane through `center`
/// with unit `normal`; beam steering runs along the horizontal in-plane
/// axis cross(normal, z-up).
struct RisPanel {
    std::vector<Vec3> element_positions;
    Vec3 normal{1.0, 0.0, 0.0};
    Vec3 center{};

    size_t element_count() const { return element_positions.size(); }

    /// Horizontal in-plane steering axis.
    Vec3 steering_axis() const;

    /// Element coordinate along the steering axis, relative to center.
    double element_u(size_t n) const;

    /// Throws if any element is farther than 1e-9 m from the panel plane.
    void validate() const;
};

/// Uniform rows x cols grid panel in the plane orthogonal to `normal`.
RisPanel make_grid_panel(const Vec3& center, const Vec3& normal, int rows, int cols,
                         double spacing_m);

/// One reflected beam: per-element amplitude in [0,1] and phase in [0,2pi).
struct RisConfiguration {
    std::vector<double> amplitudes;
    std::vector<double> phases;
    double beam_label_deg = 0.0;

    void validate() const;
};

enum class Quantization { continuous, one_bit };

std::string to_string(Quantization q);
Quantization quantization_from_string(const std::string& s);

struct Codebook {
    std::vector<RisConfiguration> beams;
    double incidence_deg = 0.0;
    Quantization quantization = Quantization::continuous;

    size_t beam_count() const { return beams.size(); }
    void validate() const;

    std::string to_json_string() const;
    static Codebook from_json_string(const std::string& text);
};

/// Phase-gradient steering phase for an element at in-plane coordinate u:
/// mod(-(2*pi/lambda) * (sin(theta_r) - sin(theta_i)) * u, 2*pi).
double steering_phase(double u_m, double theta_i_deg, double theta_r_deg, double wavelength_m);

/// Panel-aware overload; u is taken along the panel steering axis.
double steering_phase(const RisPanel& panel, size_t element, double theta_i_deg,
                      double theta_r_deg, double wavelength_m);

/// Snaps each phase to the nearer of {0, pi}; amplitudes untouched.
RisConfiguration quantize_one_bit(const RisConfiguration& config);

/// One configuration per reflection angle, sorted ascending. Continuous mode
/// applies steering_phase with unit amplitudes; one_bit additionally snaps
/// phases to {0, pi}.
Codebook build_codebook(const RisPanel& panel, double theta_i_deg,
                        std::vector<double> angles_deg, Quantization quantization,
                        double wavelength_m);

/// All-off configuration (every amplitude zero); the without-RIS baseline.
Codebook null_codebook(size_t element_count);

/// Normalized power gain |sum_n a_n exp(j(phi_n + k (sin(theta)-sin(theta_i)) u_n))|^2 / M^2.
double array_gain(const RisPanel& panel, const RisConfiguration& config, double theta_i_deg,
                  double theta_deg, double wavelength_m);

}  // namespace wiris
