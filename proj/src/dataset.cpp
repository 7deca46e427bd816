#include "wiris/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "wiris/file_io.hpp"
#include "wiris/parallel.hpp"
#include "wiris/rng.hpp"

namespace wiris {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<PlacementCase> enumerate_cases(int s, int i) {
    if (i < 1 || i > s) throw std::invalid_argument("enumerate_cases: need 1 <= I <= S");
    std::vector<PlacementCase> cases;
    std::vector<int> current;
    // Depth-first extension emits subsets in lexicographic order.
    auto emit = [&]() {
        PlacementCase c;
        c.case_id = static_cast<int>(cases.size());
        c.occupied = current;
        cases.push_back(std::move(c));
    };
    std::function<void(int)> expand = [&](int next) {
        for (int v = next; v < s; ++v) {
            current.push_back(v);
            emit();
            if (static_cast<int>(current.size()) < i) expand(v + 1);
            current.pop_back();
        }
    };
    expand(0);
    return cases;
}

TokenSequence label_sequence(const PlacementCase& c, const Scene& scene,
                             const TokenVocab& vocab) {
    std::vector<Vec2> points;
    for (int idx : c.occupied) {
        if (idx < 0 || idx >= scene.reference_point_count())
            throw std::invalid_argument("label_sequence: occupied index out of range");
        points.push_back(scene.reference_points[idx]);
    }
    std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    TokenSequence seq;
    seq.ids.push_back(TokenVocab::kSos);
    for (const Vec2& p : points) {
        seq.ids.push_back(vocab.id_for_x(p.x));
        seq.ids.push_back(vocab.id_for_y(p.y));
    }
    seq.ids.push_back(TokenVocab::kEos);
    return seq;
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        default: return "none";
    }
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    if (s == "none") return Split::none;
    throw std::invalid_argument("unknown split: " + s);
}

const CsiSample& FingerprintDatabase::record_at(int case_id, int beam, int rep) const {
    size_t idx = (static_cast<size_t>(case_id) * beam_count() + beam) * samples_per_case + rep;
    return records.at(idx);
}

Split FingerprintDatabase::split_of(int case_id, int rep) const {
    if (split_assignment.empty()) return Split::none;
    return split_assignment.at(static_cast<size_t>(case_id) * samples_per_case + rep);
}

std::vector<int> FingerprintDatabase::reps_in_split(int case_id, Split s) const {
    std::vector<int> reps;
    for (int r = 0; r < samples_per_case; ++r) {
        if (split_of(case_id, r) == s) reps.push_back(r);
    }
    return reps;
}

bool FingerprintDatabase::operator==(const FingerprintDatabase& o) const {
    auto sample_eq = [](const CsiSample& a, const CsiSample& b) {
        return a.case_id == b.case_id && a.beam_index == b.beam_index &&
               a.repetition == b.repetition && a.noise_seed == b.noise_seed &&
               a.subcarriers == b.subcarriers && a.pairs == b.pairs &&
               a.amplitudes == b.amplitudes;
    };
    if (!(cases == o.cases && labels == o.labels && split_assignment == o.split_assignment &&
          samples_per_case == o.samples_per_case && master_seed == o.master_seed &&
          with_ris == o.with_ris && records.size() == o.records.size()))
        return false;
    for (size_t i = 0; i < records.size(); ++i) {
        if (!sample_eq(records[i], o.records[i])) return false;
    }
    return true;
}

FingerprintDatabase build_database(const Scene& scene, const RadioConfig& radio,
                                   const Codebook& codebook,
                                   const std::vector<PlacementCase>& cases, int samples_per_case,
                                   uint64_t master_seed) {
    if (samples_per_case < 1) throw std::invalid_argument("build_database: samples_per_case >= 1");
    scene.validate();
    radio.validate();
    codebook.validate();

    FingerprintDatabase db;
    db.scene = scene;
    db.radio = radio;
    db.codebook = codebook;
    db.cases = cases;
    db.samples_per_case = samples_per_case;
    db.master_seed = master_seed;
    db.with_ris = false;
    for (const auto& b : codebook.beams) {
        for (double a : b.amplitudes) {
            if (a != 0.0) {
                db.with_ris = true;
                break;
            }
        }
    }

    TokenVocab vocab(scene.reference_points);
    db.labels.resize(cases.size());
    for (const PlacementCase& c : cases) db.labels[c.case_id] = label_sequence(c, scene, vocab);

    int r_beams = db.beam_count();
    size_t total = cases.size() * static_cast<size_t>(r_beams) * samples_per_case;
    db.records.resize(total);

    // One channel evaluation per (case, beam); repetitions only redraw noise.
    size_t pairs = cases.size() * static_cast<size_t>(r_beams);
    parallel_for(pairs, [&](size_t job) {
        int case_id = static_cast<int>(job / r_beams);
        int beam = static_cast<int>(job % r_beams);
        std::vector<Vec2> people;
        for (int idx : cases[case_id].occupied) people.push_back(scene.reference_points[idx]);
        EffectiveChannel ch = scene_channel(scene, radio, codebook.beams[beam], people);
        for (int rep = 0; rep < samples_per_case; ++rep) {
            uint64_t seed = hash_seed({master_seed, static_cast<uint64_t>(case_id),
                                       static_cast<uint64_t>(beam), static_cast<uint64_t>(rep)});
            CsiSample sample = add_noise(ch, radio, seed);
            sample.case_id = case_id;
            sample.beam_index = beam;
            sample.repetition = rep;
            size_t idx = (static_cast<size_t>(case_id) * r_beams + beam) *
                             static_cast<size_t>(samples_per_case) +
                         rep;
            db.records[idx] = std::move(sample);
        }
    });
    return db;
}

void split_database(FingerprintDatabase& db, const SplitCounts& counts, uint64_t seed,
                    SplitMode mode) {
    if (counts.train < 0 || counts.val < 0 || counts.test < 0)
        throw std::invalid_argument("split: negative count");
    db.split_assignment.assign(static_cast<size_t>(db.case_count()) * db.samples_per_case,
                               Split::none);
    db.split_counts = counts;
    db.split_mode = mode;
    db.split_seed = seed;

    if (mode == SplitMode::repetition) {
        if (counts.total() > db.samples_per_case)
            throw std::invalid_argument("split: counts exceed samples_per_case");
        for (int c = 0; c < db.case_count(); ++c) {
            std::vector<int> reps(db.samples_per_case);
            std::iota(reps.begin(), reps.end(), 0);
            Rng rng(hash_seed({seed, static_cast<uint64_t>(c)}));
            for (size_t i = reps.size(); i > 1; --i)
                std::swap(reps[i - 1], reps[rng.below(i)]);
            size_t pos = 0;
            auto assign = [&](int n, Split s) {
                for (int k = 0; k < n; ++k, ++pos)
                    db.split_assignment[static_cast<size_t>(c) * db.samples_per_case +
                                        reps[pos]] = s;
            };
            assign(counts.train, Split::train);
            assign(counts.val, Split::val);
            assign(counts.test, Split::test);
        }
        return;
    }

    // held_out_case: whole cases go to one split, counts taken as ratios.
    if (counts.total() <= 0) throw std::invalid_argument("split: empty counts");
    int c_total = db.case_count();
    std::vector<int> order(c_total);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    int n_val = static_cast<int>(static_cast<double>(counts.val) / counts.total() * c_total);
    int n_test = static_cast<int>(static_cast<double>(counts.test) / counts.total() * c_total);
    int n_train = c_total - n_val - n_test;
    for (int i = 0; i < c_total; ++i) {
        Split s = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
        for (int rep = 0; rep < db.samples_per_case; ++rep)
            db.split_assignment[static_cast<size_t>(order[i]) * db.samples_per_case + rep] = s;
    }
}

std::string content_hash(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

void FingerprintDatabase::save(const std::string& dir) const {
    fs::create_directories(dir);
    fs::path base(dir);

    std::string scene_json = scene.to_json_string();
    std::string codebook_json = codebook.to_json_string();

    std::ostringstream records_out;
    for (const CsiSample& s : records) {
        json amp = json::array();
        for (int p = 0; p < s.pairs; ++p) {
            json row = json::array();
            for (int k = 0; k < s.subcarriers; ++k) row.push_back(s.at(k, p));
            amp.push_back(std::move(row));
        }
        json line = {{"case_id", s.case_id}, {"beam", s.beam_index},   {"rep", s.repetition},
                     {"seed", s.noise_seed}, {"amp", std::move(amp)}};
        records_out << line.dump() << "\n";
    }
    std::string records_jsonl = records_out.str();

    std::ostringstream labels_out;
    for (const PlacementCase& c : cases) {
        json coords = json::array();
        for (int idx : c.occupied)
            coords.push_back(json::array({scene.reference_points[idx].x,
                                          scene.reference_points[idx].y}));
        json line = {{"case_id", c.case_id},
                     {"occupied", c.occupied},
                     {"coords", std::move(coords)},
                     {"tokens", labels[c.case_id].ids}};
        labels_out << line.dump() << "\n";
    }
    std::string labels_jsonl = labels_out.str();

    std::ostringstream splits_out;
    if (!split_assignment.empty()) {
        for (int c = 0; c < case_count(); ++c) {
            for (int rep = 0; rep < samples_per_case; ++rep) {
                json line = {{"case_id", c}, {"rep", rep}, {"split", to_string(split_of(c, rep))}};
                splits_out << line.dump() << "\n";
            }
        }
    }
    std::string splits_jsonl = splits_out.str();

    json manifest;
    manifest["schema"] = "wiris.database/1";
    manifest["with_ris"] = with_ris;
    manifest["counts"] = {{"S", scene.reference_point_count()},
                          {"C", case_count()},
                          {"R", beam_count()},
                          {"K", radio.subcarrier_count},
                          {"P", radio.pair_count()},
                          {"samples_per_case", samples_per_case},
                          {"records", records.size()}};
    manifest["master_seed"] = master_seed;
    manifest["radio"] = {{"carrier_hz", radio.carrier_hz},
                         {"bandwidth_hz", radio.bandwidth_hz},
                         {"subcarriers", radio.subcarrier_count},
                         {"tx_power_dbm", radio.tx_power_dbm},
                         {"tx_antennas", radio.tx_antennas},
                         {"rx_antennas", radio.rx_antennas}};
    if (radio.noise_power_override_mw)
        manifest["radio"]["noise_power_override_mw"] = *radio.noise_power_override_mw;
    if (!split_assignment.empty()) {
        manifest["split"] = {{"mode", split_mode == SplitMode::repetition ? "repetition"
                                                                          : "held_out_case"},
                             {"train", split_counts.train},
                             {"val", split_counts.val},
                             {"test", split_counts.test},
                             {"seed", split_seed}};
    }
    manifest["hashes"] = {{"scene", content_hash(scene_json)},
                          {"codebook", content_hash(codebook_json)},
                          {"records", content_hash(records_jsonl)},
                          {"labels", content_hash(labels_jsonl)},
                          {"splits", content_hash(splits_jsonl)}};

    write_file(base / "scene.json", scene_json);
    write_file(base / "codebook.json", codebook_json);
    write_file(base / "records.jsonl", records_jsonl);
    write_file(base / "labels.jsonl", labels_jsonl);
    if (!splits_jsonl.empty()) write_file(base / "splits.jsonl", splits_jsonl);
    write_file(base / "manifest.json", manifest.dump(2));
}

FingerprintDatabase FingerprintDatabase::load(const std::string& dir) {
    fs::path base(dir);
    json manifest = json::parse(read_file(base / "manifest.json"));
    if (manifest.at("schema").get<std::string>() != "wiris.database/1")
        throw std::runtime_error("database schema mismatch in " + dir +
                                 "; regenerate with `wiris simulate`");

    std::string scene_json = read_file(base / "scene.json");
    std::string codebook_json = read_file(base / "codebook.json");
    std::string records_jsonl = read_file(base / "records.jsonl");
    std::string labels_jsonl = read_file(base / "labels.jsonl");
    std::string splits_jsonl;
    if (fs::exists(base / "splits.jsonl")) splits_jsonl = read_file(base / "splits.jsonl");

    const json& hashes = manifest.at("hashes");
    auto check = [&](const char* key, const std::string& text) {
        if (hashes.at(key).get<std::string>() != content_hash(text))
            throw std::runtime_error(std::string("database file ") + key + " in " + dir +
                                     " does not match its manifest hash; stale or edited "
                                     "artifact, re-run `wiris simulate`");
    };
    check("scene", scene_json);
    check("codebook", codebook_json);
    check("records", records_jsonl);
    check("labels", labels_jsonl);
    check("splits", splits_jsonl);

    FingerprintDatabase db;
    db.scene = Scene::from_json_string(scene_json);
    db.codebook = Codebook::from_json_string(codebook_json);
    db.with_ris = manifest.at("with_ris").get<bool>();
    db.master_seed = manifest.at("master_seed").get<uint64_t>();
    db.samples_per_case = manifest.at("counts").at("samples_per_case").get<int>();

    const json& rj = manifest.at("radio");
    db.radio.carrier_hz = rj.at("carrier_hz").get<double>();
    db.radio.bandwidth_hz = rj.at("bandwidth_hz").get<double>();
    db.radio.subcarrier_count = rj.at("subcarriers").get<int>();
    db.radio.tx_power_dbm = rj.at("tx_power_dbm").get<double>();
    db.radio.tx_antennas = rj.at("tx_antennas").get<int>();
    db.radio.rx_antennas = rj.at("rx_antennas").get<int>();
    if (rj.contains("noise_power_override_mw"))
        db.radio.noise_power_override_mw = rj.at("noise_power_override_mw").get<double>();

    TokenVocab vocab(db.scene.reference_points);
    std::istringstream labels_in(labels_jsonl);
    std::string line;
    while (std::getline(labels_in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        PlacementCase c;
        c.case_id = j.at("case_id").get<int>();
        c.occupied = j.at("occupied").get<std::vector<int>>();
        TokenSequence seq;
        seq.ids = j.at("tokens").get<std::vector<int>>();
        db.cases.push_back(std::move(c));
        db.labels.push_back(std::move(seq));
    }

    int r_beams = db.beam_count();
    db.records.resize(db.cases.size() * static_cast<size_t>(r_beams) * db.samples_per_case);
    std::istringstream records_in(records_jsonl);
    while (std::getline(records_in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        CsiSample s;
        s.case_id = j.at("case_id").get<int>();
        s.beam_index = j.at("beam").get<int>();
        s.repetition = j.at("rep").get<int>();
        s.noise_seed = j.at("seed").get<uint64_t>();
        const json& amp = j.at("amp");
        s.pairs = static_cast<int>(amp.size());
        s.subcarriers = static_cast<int>(amp.at(0).size());
        for (const auto& row : amp) {
            for (const auto& v : row) s.amplitudes.push_back(v.get<double>());
        }
        size_t idx = (static_cast<size_t>(s.case_id) * r_beams + s.beam_index) *
                         static_cast<size_t>(db.samples_per_case) +
                     s.repetition;
        db.records.at(idx) = std::move(s);
    }

    if (!splits_jsonl.empty()) {
        db.split_assignment.assign(db.cases.size() * static_cast<size_t>(db.samples_per_case),
                                   Split::none);
        std::istringstream splits_in(splits_jsonl);
        while (std::getline(splits_in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            size_t idx = j.at("case_id").get<size_t>() * db.samples_per_case +
                         j.at("rep").get<size_t>();
            db.split_assignment.at(idx) = split_from_string(j.at("split").get<std::string>());
        }
        const json& sp = manifest.at("split");
        db.split_counts = {sp.at("train").get<int>(), sp.at("val").get<int>(),
                           sp.at("test").get<int>()};
        db.split_mode = sp.at("mode").get<std::string>() == "repetition"
                            ? SplitMode::repetition
                            : SplitMode::held_out_case;
        db.split_seed = sp.at("seed").get<uint64_t>();
    }
    return db;
}

}  // namespace wiris
