#include "wiris/ris.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wiris {

using nlohmann::json;

Vec3 RisPanel::steering_axis() const {
    Vec3 axis = normal.cross(Vec3{0.0, 0.0, 1.0});
    if (axis.norm() < 1e-12) {
        // Horizontal panel looking straight up/down: fall back to x.
        return {1.0, 0.0, 0.0};
    }
    return axis.normalized();
}

double RisPanel::element_u(size_t n) const {
    return (element_positions.at(n) - center).dot(steering_axis());
}

void RisPanel::validate() const {
    if (element_positions.empty()) throw std::invalid_argument("RIS panel has no elements");
    Vec3 n = normal.normalized();
    for (const Vec3& p : element_positions) {
        if (std::abs((p - center).dot(n)) > 1e-9)
            throw std::invalid_argument("RIS element off the panel plane");
    }
}

RisPanel make_grid_panel(const Vec3& center, const Vec3& normal, int rows, int cols,
                         double spacing_m) {
    if (rows < 1 || cols < 1 || spacing_m <= 0.0)
        throw std::invalid_argument("panel grid needs rows, cols >= 1 and spacing > 0");
    RisPanel panel;
    panel.center = center;
    panel.normal = normal.normalized();
    Vec3 u_axis = panel.steering_axis();
    Vec3 v_axis = panel.normal.cross(u_axis).normalized();
    panel.element_positions.reserve(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double u = (c - (cols - 1) / 2.0) * spacing_m;
            double v = (r - (rows - 1) / 2.0) * spacing_m;
            panel.element_positions.push_back(center + u_axis * u + v_axis * v);
        }
    }
    return panel;
}

void RisConfiguration::validate() const {
    if (amplitudes.size() != phases.size())
        throw std::invalid_argument("amplitude/phase length mismatch");
    for (double a : amplitudes) {
        if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("amplitude outside [0,1]");
    }
    for (double p : phases) {
        if (!(p >= 0.0 && p < 2.0 * std::numbers::pi))
            throw std::invalid_argument("phase outside [0,2pi)");
    }
}

std::string to_string(Quantization q) {
    return q == Quantization::continuous ? "continuous" : "one_bit";
}

Quantization quantization_from_string(const std::string& s) {
    if (s == "continuous") return Quantization::continuous;
    if (s == "one_bit") return Quantization::one_bit;
    throw std::invalid_argument("unknown quantization: " + s);
}

void Codebook::validate() const {
    if (beams.empty()) throw std::invalid_argument("codebook has no beams");
    for (size_t i = 0; i + 1 < beams.size(); ++i) {
        if (!(beams[i].beam_label_deg < beams[i + 1].beam_label_deg))
            throw std::invalid_argument("beam labels must be strictly increasing");
    }
    for (const auto& b : beams) b.validate();
}

double steering_phase(double u_m, double theta_i_deg, double theta_r_deg, double wavelength_m) {
    if (!std::isfinite(u_m) || !std::isfinite(theta_i_deg) || !std::isfinite(theta_r_deg) ||
        !std::isfinite(wavelength_m))
        throw std::invalid_argument("steering_phase: non-finite input");
    if (wavelength_m <= 0.0) throw std::invalid_argument("steering_phase: wavelength must be > 0");
    if (std::abs(theta_i_deg) > 90.0 || std::abs(theta_r_deg) > 90.0)
        throw std::invalid_argument("steering_phase: angle outside [-90, 90] degrees");
    double k = 2.0 * std::numbers::pi / wavelength_m;
    double gradient = std::sin(deg2rad(theta_r_deg)) - std::sin(deg2rad(theta_i_deg));
    return wrap_2pi(-k * gradient * u_m);
}

double steering_phase(const RisPanel& panel, size_t element, double theta_i_deg,
                      double theta_r_deg, double wavelength_m) {
    return steering_phase(panel.element_u(element), theta_i_deg, theta_r_deg, wavelength_m);
}

RisConfiguration quantize_one_bit(const RisConfiguration& config) {
    RisConfiguration out = config;
    for (double& phi : out.phases) {
        // Nearer of {0, pi} on the circle; [pi/2, 3pi/2) maps to pi.
        double p = wrap_2pi(phi);
        phi = (p >= std::numbers::pi / 2.0 && p < 3.0 * std::numbers::pi / 2.0) ? std::numbers::pi
                                                                                : 0.0;
    }
    return out;
}

Codebook build_codebook(const RisPanel& panel, double theta_i_deg,
                        std::vector<double> angles_deg, Quantization quantization,
                        double wavelength_m) {
    panel.validate();
    if (angles_deg.empty()) throw std::invalid_argument("build_codebook: no angles");
    std::sort(angles_deg.begin(), angles_deg.end());
    for (size_t i = 0; i + 1 < angles_deg.size(); ++i) {
        if (angles_deg[i] == angles_deg[i + 1])
            throw std::invalid_argument("build_codebook: duplicate reflection angle");
    }
    Codebook book;
    book.incidence_deg = theta_i_deg;
    book.quantization = quantization;
    size_t m = panel.element_count();
    for (double theta_r : angles_deg) {
        RisConfiguration cfg;
        cfg.beam_label_deg = theta_r;
        cfg.amplitudes.assign(m, 1.0);
        cfg.phases.resize(m);
        for (size_t n = 0; n < m; ++n)
            cfg.phases[n] = steering_phase(panel, n, theta_i_deg, theta_r, wavelength_m);
        if (quantization == Quantization::one_bit) cfg = quantize_one_bit(cfg);
        book.beams.push_back(std::move(cfg));
    }
    book.validate();
    return book;
}

Codebook null_codebook(size_t element_count) {
    Codebook book;
    book.quantization = Quantization::continuous;
    RisConfiguration off;
    off.beam_label_deg = 0.0;
    off.amplitudes.assign(element_count, 0.0);
    off.phases.assign(element_count, 0.0);
    book.beams.push_back(std::move(off));
    return book;
}

double array_gain(const RisPanel& panel, const RisConfiguration& config, double theta_i_deg,
                  double theta_deg, double wavelength_m) {
    size_t m = panel.element_count();
    if (m == 0) throw std::invalid_argument("array_gain: empty panel");
    if (config.amplitudes.size() != m || config.phases.size() != m)
        throw std::invalid_argument("array_gain: configuration size mismatch");
    double k = 2.0 * std::numbers::pi / wavelength_m;
    double gradient = std::sin(deg2rad(theta_deg)) - std::sin(deg2rad(theta_i_deg));
    std::complex<double> sum = 0.0;
    for (size_t n = 0; n < m; ++n) {
        double arg = config.phases[n] + k * gradient * panel.element_u(n);
        sum += config.amplitudes[n] * std::polar(1.0, arg);
    }
    double mag = std::abs(sum) / static_cast<double>(m);
    return mag * mag;
}

std::string Codebook::to_json_string() const {
    json j;
    j["incidence_deg"] = incidence_deg;
    j["quantization"] = to_string(quantization);
    json beams_j = json::array();
    for (const auto& b : beams) {
        beams_j.push_back({{"theta_r_deg", b.beam_label_deg},
                           {"amplitudes", b.amplitudes},
                           {"phases", b.phases}});
    }
    j["beams"] = beams_j;
    return j.dump(2);
}

Codebook Codebook::from_json_string(const std::string& text) {
    json j = json::parse(text);
    Codebook book;
    book.incidence_deg = j.at("incidence_deg").get<double>();
    book.quantization = quantization_from_string(j.at("quantization").get<std::string>());
    for (const auto& bj : j.at("beams")) {
        RisConfiguration cfg;
        cfg.beam_label_deg = bj.at("theta_r_deg").get<double>();
        cfg.amplitudes = bj.at("amplitudes").get<std::vector<double>>();
        cfg.phases = bj.at("phases").get<std::vector<double>>();
        book.beams.push_back(std::move(cfg));
    }
    return book;
}

}  // namespace wiris
