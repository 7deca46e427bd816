#include "wiris/scene.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wiris {

using nlohmann::json;

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kSubcarrierSpacingHz = 312.5e3;
}  // namespace

double RadioConfig::wavelength_m() const { return kSpeedOfLight / carrier_hz; }

std::vector<double> RadioConfig::subcarrier_frequencies() const {
    std::vector<double> freqs;
    freqs.reserve(subcarrier_count);
    int k = subcarrier_count;
    if (k % 2 == 0) {
        // indices -k/2..-1, 1..k/2
        for (int i = -k / 2; i <= k / 2; ++i) {
            if (i == 0) continue;
            freqs.push_back(carrier_hz + i * kSubcarrierSpacingHz);
        }
    } else {
        for (int i = -(k - 1) / 2; i <= (k - 1) / 2; ++i)
            freqs.push_back(carrier_hz + i * kSubcarrierSpacingHz);
    }
    return freqs;
}

double RadioConfig::noise_power_mw() const {
    if (noise_power_override_mw) return *noise_power_override_mw;
    // -174 dBm/Hz thermal floor over the per-subcarrier bandwidth.
    double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz / subcarrier_count);
    return std::pow(10.0, dbm / 10.0);
}

void RadioConfig::validate() const {
    if (subcarrier_count < 1) throw std::invalid_argument("subcarrier count must be >= 1");
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
    if (carrier_hz <= 0.0) throw std::invalid_argument("carrier must be > 0");
    if (tx_antennas < 1 || rx_antennas < 1)
        throw std::invalid_argument("antenna counts must be >= 1");
    if (noise_power_override_mw && *noise_power_override_mw < 0.0)
        throw std::invalid_argument("noise override must be >= 0");
}

void Scene::validate() const {
    if (room_polygon.size() < 3) throw std::invalid_argument("room polygon needs >= 3 vertices");
    ris_panel.validate();
    if (tx_positions.empty() || rx_positions.empty())
        throw std::invalid_argument("scene needs at least one tx and one rx");
    for (const Vec3& p : tx_positions) {
        if (!point_in_polygon(p.xy(), room_polygon))
            throw std::invalid_argument("tx position outside room");
    }
    for (const Vec3& p : rx_positions) {
        if (!point_in_polygon(p.xy(), room_polygon))
            throw std::invalid_argument("rx position outside room");
    }
    for (const Vec2& p : reference_points) {
        if (!point_in_polygon(p, room_polygon))
            throw std::invalid_argument("reference point outside room");
    }
    for (size_t i = 0; i < reference_points.size(); ++i) {
        for (size_t j = i + 1; j < reference_points.size(); ++j) {
            if (reference_points[i].x == reference_points[j].x &&
                reference_points[i].y == reference_points[j].y)
                throw std::invalid_argument("duplicate reference points");
        }
    }
    if (person_model.body_radius <= 0.0 || person_model.height <= 0.0)
        throw std::invalid_argument("person model needs positive radius and height");
}

namespace {

json vec2_json(const Vec2& v) { return json::array({v.x, v.y}); }
json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
Vec3 vec3_from(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

std::string Scene::to_json_string() const {
    json j;
    json poly = json::array();
    for (const auto& v : room_polygon) poly.push_back(vec2_json(v));
    j["room_polygon"] = poly;
    json blk = json::array();
    for (const auto& b : blockers)
        blk.push_back({{"a", vec2_json(b.a)}, {"b", vec2_json(b.b)}, {"loss_db", b.loss_db}});
    j["blockers"] = blk;
    json tx = json::array();
    for (const auto& p : tx_positions) tx.push_back(vec3_json(p));
    j["tx_positions"] = tx;
    json rx = json::array();
    for (const auto& p : rx_positions) rx.push_back(vec3_json(p));
    j["rx_positions"] = rx;
    json elems = json::array();
    for (const auto& p : ris_panel.element_positions) elems.push_back(vec3_json(p));
    j["ris_panel"] = {{"element_positions", elems},
                      {"normal", vec3_json(ris_panel.normal)},
                      {"center", vec3_json(ris_panel.center)}};
    json refs = json::array();
    for (const auto& p : reference_points) refs.push_back(vec2_json(p));
    j["reference_points"] = refs;
    j["person_model"] = {{"scatter_gain", person_model.scatter_gain},
                         {"body_radius", person_model.body_radius},
                         {"height", person_model.height}};
    return j.dump(2);
}

Scene Scene::from_json_string(const std::string& text) {
    json j = json::parse(text);
    Scene s;
    for (const auto& v : j.at("room_polygon")) s.room_polygon.push_back(vec2_from(v));
    for (const auto& b : j.at("blockers"))
        s.blockers.push_back(
            {vec2_from(b.at("a")), vec2_from(b.at("b")), b.at("loss_db").get<double>()});
    for (const auto& p : j.at("tx_positions")) s.tx_positions.push_back(vec3_from(p));
    for (const auto& p : j.at("rx_positions")) s.rx_positions.push_back(vec3_from(p));
    const auto& pj = j.at("ris_panel");
    for (const auto& e : pj.at("element_positions"))
        s.ris_panel.element_positions.push_back(vec3_from(e));
    s.ris_panel.normal = vec3_from(pj.at("normal"));
    s.ris_panel.center = vec3_from(pj.at("center"));
    for (const auto& p : j.at("reference_points")) s.reference_points.push_back(vec2_from(p));
    const auto& pm = j.at("person_model");
    s.person_model.scatter_gain = pm.at("scatter_gain").get<double>();
    s.person_model.body_radius = pm.at("body_radius").get<double>();
    s.person_model.height = pm.at("height").get<double>();
    s.validate();
    return s;
}

Scene make_desk_scene() {
    Scene s;
    s.room_polygon = {{0, 0}, {6, 0}, {6, 3}, {3, 3}, {3, 6}, {0, 6}};
    // Interior corner walls of the L plus the board shadowing the direct path.
    s.blockers.push_back({{3, 3}, {3, 6}, 30.0});
    s.blockers.push_back({{3, 3}, {6, 3}, 30.0});
    s.blockers.push_back({{1.6, 3.6}, {1.6, 4.8}, 40.0});
    s.tx_positions = {{1.2, 4.5, 1.5}};
    s.rx_positions = {{5.0, 1.0, 1.5}};
    double wavelength = RadioConfig{}.wavelength_m();
    s.ris_panel = make_grid_panel({0.0, 4.5, 1.5}, {1.0, 0.0, 0.0}, 10, 10, wavelength / 2.0);
    s.reference_points = {{3, 1}, {4, 1}, {3, 2}, {4, 2}};
    s.validate();
    return s;
}

}  // namespace wiris
