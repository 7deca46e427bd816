#include "wiris/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wiris/file_io.hpp"
#include "wiris/parallel.hpp"
#include "wiris/preprocess.hpp"

namespace wiris {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig RunConfig::desk_default() {
    RunConfig cfg;
    cfg.radio.tx_power_dbm = 20.0;
    cfg.train_options.max_steps = 600;
    cfg.train_options.batch_size = 16;
    cfg.train_options.learning_rate = 3e-4;
    cfg.train_options.eval_every = 25;
    cfg.train_options.patience = 8;
    return cfg;
}

void RunConfig::apply_seed(uint64_t seed) {
    master_seed = seed;
    split_seed = seed;
    model_seed = seed;
}

Scene RunConfig::load_scene() const {
    if (scene_ref == "builtin:desk") return make_desk_scene();
    if (scene_ref.rfind("builtin:", 0) == 0)
        throw std::runtime_error("unknown builtin scene '" + scene_ref +
                                 "'; available: builtin:desk");
    return Scene::from_json_string(read_file(scene_ref));
}

ModelConfig RunConfig::model_config(int input_len) const {
    ModelConfig mc;
    if (model_profile == "desk") {
        mc = ModelConfig::desk(input_len, max_people, model_seed);
    } else if (model_profile == "paper") {
        mc = ModelConfig::paper(input_len, max_people, model_seed);
    } else if (model_profile == "custom") {
        mc.d_model = custom_d_model;
        mc.head_count = custom_heads;
        mc.encoder_layers = custom_encoder_layers;
        mc.decoder_layers = custom_decoder_layers;
        mc.ffn_dim = custom_ffn_dim;
        mc.input_len = input_len;
        mc.max_decode_len = 2 * max_people + 2;
        mc.seed = model_seed;
    } else {
        throw std::runtime_error("unknown model profile '" + model_profile +
                                 "'; expected desk, paper, or custom");
    }
    mc.dropout = dropout;
    return mc;
}

RunConfig RunConfig::from_json_string(const std::string& text) {
    RunConfig cfg = desk_default();
    json j = json::parse(text);
    if (j.contains("scene")) cfg.scene_ref = j.at("scene").get<std::string>();
    if (j.contains("radio")) {
        const json& r = j.at("radio");
        if (r.contains("carrier_hz")) cfg.radio.carrier_hz = r.at("carrier_hz").get<double>();
        if (r.contains("bandwidth_hz"))
            cfg.radio.bandwidth_hz = r.at("bandwidth_hz").get<double>();
        if (r.contains("subcarriers")) cfg.radio.subcarrier_count = r.at("subcarriers").get<int>();
        if (r.contains("tx_power_dbm"))
            cfg.radio.tx_power_dbm = r.at("tx_power_dbm").get<double>();
        if (r.contains("tx_antennas")) cfg.radio.tx_antennas = r.at("tx_antennas").get<int>();
        if (r.contains("rx_antennas")) cfg.radio.rx_antennas = r.at("rx_antennas").get<int>();
        if (r.contains("noise_power_override_mw"))
            cfg.radio.noise_power_override_mw = r.at("noise_power_override_mw").get<double>();
    }
    if (j.contains("codebook")) {
        const json& c = j.at("codebook");
        if (c.contains("incidence_deg"))
            cfg.codebook_incidence_deg = c.at("incidence_deg").get<double>();
        if (c.contains("angles_deg"))
            cfg.codebook_angles_deg = c.at("angles_deg").get<std::vector<double>>();
        if (c.contains("quantization"))
            cfg.codebook_quantization =
                quantization_from_string(c.at("quantization").get<std::string>());
    }
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        if (d.contains("max_people")) cfg.max_people = d.at("max_people").get<int>();
        if (d.contains("samples_per_case"))
            cfg.samples_per_case = d.at("samples_per_case").get<int>();
        if (d.contains("master_seed")) cfg.master_seed = d.at("master_seed").get<uint64_t>();
        if (d.contains("split")) {
            const json& s = d.at("split");
            if (s.contains("mode"))
                cfg.split_mode = s.at("mode").get<std::string>() == "held_out_case"
                                     ? SplitMode::held_out_case
                                     : SplitMode::repetition;
            if (s.contains("train")) cfg.split_counts.train = s.at("train").get<int>();
            if (s.contains("val")) cfg.split_counts.val = s.at("val").get<int>();
            if (s.contains("test")) cfg.split_counts.test = s.at("test").get<int>();
            if (s.contains("seed")) cfg.split_seed = s.at("seed").get<uint64_t>();
        }
    }
    if (j.contains("model")) {
        const json& m = j.at("model");
        if (m.contains("profile")) cfg.model_profile = m.at("profile").get<std::string>();
        if (m.contains("d_model")) cfg.custom_d_model = m.at("d_model").get<int>();
        if (m.contains("heads")) cfg.custom_heads = m.at("heads").get<int>();
        if (m.contains("encoder_layers"))
            cfg.custom_encoder_layers = m.at("encoder_layers").get<int>();
        if (m.contains("decoder_layers"))
            cfg.custom_decoder_layers = m.at("decoder_layers").get<int>();
        if (m.contains("ffn_dim")) cfg.custom_ffn_dim = m.at("ffn_dim").get<int>();
        if (m.contains("dropout")) cfg.dropout = m.at("dropout").get<double>();
        if (m.contains("seed")) cfg.model_seed = m.at("seed").get<uint64_t>();
        if (m.contains("max_steps")) cfg.train_options.max_steps = m.at("max_steps").get<int>();
        if (m.contains("batch_size"))
            cfg.train_options.batch_size = m.at("batch_size").get<int>();
        if (m.contains("learning_rate"))
            cfg.train_options.learning_rate = m.at("learning_rate").get<double>();
        if (m.contains("clip_norm")) cfg.train_options.clip_norm = m.at("clip_norm").get<double>();
        if (m.contains("eval_every")) cfg.train_options.eval_every = m.at("eval_every").get<int>();
        if (m.contains("patience")) cfg.train_options.patience = m.at("patience").get<int>();
        if (m.contains("val_eval_cap"))
            cfg.train_options.val_eval_cap = m.at("val_eval_cap").get<int>();
        if (m.contains("stop_train_seq_acc"))
            cfg.train_options.stop_train_seq_acc = m.at("stop_train_seq_acc").get<double>();
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    return cfg;
}

std::string RunConfig::to_json_string() const {
    json j;
    j["scene"] = scene_ref;
    j["radio"] = {{"carrier_hz", radio.carrier_hz},
                  {"bandwidth_hz", radio.bandwidth_hz},
                  {"subcarriers", radio.subcarrier_count},
                  {"tx_power_dbm", radio.tx_power_dbm},
                  {"tx_antennas", radio.tx_antennas},
                  {"rx_antennas", radio.rx_antennas}};
    if (radio.noise_power_override_mw)
        j["radio"]["noise_power_override_mw"] = *radio.noise_power_override_mw;
    j["codebook"] = {{"incidence_deg", codebook_incidence_deg},
                     {"angles_deg", codebook_angles_deg},
                     {"quantization", to_string(codebook_quantization)}};
    j["dataset"] = {{"max_people", max_people},
                    {"samples_per_case", samples_per_case},
                    {"master_seed", master_seed},
                    {"split",
                     {{"mode", split_mode == SplitMode::repetition ? "repetition"
                                                                   : "held_out_case"},
                      {"train", split_counts.train},
                      {"val", split_counts.val},
                      {"test", split_counts.test},
                      {"seed", split_seed}}}};
    j["model"] = {{"profile", model_profile},
                  {"dropout", dropout},
                  {"seed", model_seed},
                  {"max_steps", train_options.max_steps},
                  {"batch_size", train_options.batch_size},
                  {"learning_rate", train_options.learning_rate},
                  {"clip_norm", train_options.clip_norm},
                  {"eval_every", train_options.eval_every},
                  {"patience", train_options.patience},
                  {"val_eval_cap", train_options.val_eval_cap}};
    if (model_profile == "custom") {
        j["model"]["d_model"] = custom_d_model;
        j["model"]["heads"] = custom_heads;
        j["model"]["encoder_layers"] = custom_encoder_layers;
        j["model"]["decoder_layers"] = custom_decoder_layers;
        j["model"]["ffn_dim"] = custom_ffn_dim;
    }
    if (train_options.stop_train_seq_acc)
        j["model"]["stop_train_seq_acc"] = *train_options.stop_train_seq_acc;
    j["out_dir"] = out_dir;
    j["seeds"] = seeds;
    return j.dump(2);
}

namespace {

fs::path arm_dir(const RunConfig& cfg, bool without_ris) {
    return fs::path(cfg.out_dir) / (without_ris ? "without" : "with");
}

fs::path db_dir(const RunConfig& cfg, bool without_ris) {
    return arm_dir(cfg, without_ris) / "db";
}

struct FeatureRow {
    int case_id = 0;
    int rep = 0;
    Split split = Split::none;
    std::vector<double> values;
};

std::vector<FeatureRow> build_feature_rows(const FingerprintDatabase& db) {
    std::vector<FeatureRow> rows;
    rows.reserve(static_cast<size_t>(db.case_count()) * db.samples_per_case);
    for (int c = 0; c < db.case_count(); ++c) {
        for (int rep = 0; rep < db.samples_per_case; ++rep) {
            std::vector<CsiSample> group;
            group.reserve(db.beam_count());
            for (int r = 0; r < db.beam_count(); ++r) group.push_back(db.record_at(c, r, rep));
            FeatureRow row;
            row.case_id = c;
            row.rep = rep;
            row.split = db.split_of(c, rep);
            row.values = concat_features(group).values;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string features_to_jsonl(const std::vector<FeatureRow>& rows) {
    std::ostringstream out;
    for (const FeatureRow& r : rows) {
        json line = {{"case_id", r.case_id},
                     {"rep", r.rep},
                     {"split", to_string(r.split)},
                     {"values", r.values}};
        out << line.dump() << "\n";
    }
    return out.str();
}

std::vector<FeatureRow> features_from_jsonl(const std::string& text) {
    std::vector<FeatureRow> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        FeatureRow r;
        r.case_id = j.at("case_id").get<int>();
        r.rep = j.at("rep").get<int>();
        r.split = split_from_string(j.at("split").get<std::string>());
        r.values = j.at("values").get<std::vector<double>>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string manifest_records_hash(const fs::path& db) {
    json manifest = json::parse(read_file(db / "manifest.json"));
    return manifest.at("hashes").at("records").get<std::string>();
}

Codebook load_or_build_codebook(const RunConfig& cfg, const Scene& scene, bool without_ris) {
    if (without_ris) return null_codebook(scene.ris_panel.element_count());
    return build_codebook(scene.ris_panel, cfg.codebook_incidence_deg, cfg.codebook_angles_deg,
                          cfg.codebook_quantization, cfg.radio.wavelength_m());
}

}  // namespace

Codebook stage_codebook(const RunConfig& cfg, std::ostream& log) {
    Scene scene = cfg.load_scene();
    Codebook book = load_or_build_codebook(cfg, scene, false);
    double wavelength = cfg.radio.wavelength_m();

    log << "codebook: " << book.beam_count() << " beams, " << to_string(book.quantization)
        << ", incidence " << cfg.codebook_incidence_deg << " deg\n";
    for (const RisConfiguration& beam : book.beams) {
        double at_label = array_gain(scene.ris_panel, beam, cfg.codebook_incidence_deg,
                                     beam.beam_label_deg, wavelength);
        double peak_gain = -1.0, peak_angle = 0.0;
        for (double theta = -90.0; theta <= 90.0; theta += 0.5) {
            double g =
                array_gain(scene.ris_panel, beam, cfg.codebook_incidence_deg, theta, wavelength);
            if (g > peak_gain) {
                peak_gain = g;
                peak_angle = theta;
            }
        }
        double half = peak_gain / 2.0;
        double lo = peak_angle, hi = peak_angle;
        while (lo > -90.0 && array_gain(scene.ris_panel, beam, cfg.codebook_incidence_deg,
                                        lo - 0.5, wavelength) >= half)
            lo -= 0.5;
        while (hi < 90.0 && array_gain(scene.ris_panel, beam, cfg.codebook_incidence_deg,
                                       hi + 0.5, wavelength) >= half)
            hi += 0.5;
        log << "  beam " << beam.beam_label_deg << " deg: gain@label " << at_label << ", peak "
            << peak_gain << " @ " << peak_angle << " deg, hpbw ~" << (hi - lo) << " deg\n";
    }

    write_file(fs::path(cfg.out_dir) / "codebook.json", book.to_json_string());
    log << "wrote " << (fs::path(cfg.out_dir) / "codebook.json").string() << "\n";
    return book;
}

std::string stage_simulate(const RunConfig& cfg, bool without_ris, std::ostream& log) {
    Scene scene = cfg.load_scene();
    Codebook book = load_or_build_codebook(cfg, scene, without_ris);
    std::vector<PlacementCase> cases =
        enumerate_cases(scene.reference_point_count(), cfg.max_people);

    FingerprintDatabase db =
        build_database(scene, cfg.radio, book, cases, cfg.samples_per_case, cfg.master_seed);
    split_database(db, cfg.split_counts, cfg.split_seed, cfg.split_mode);

    fs::path dir = db_dir(cfg, without_ris);
    db.save(dir.string());
    write_file(fs::path(cfg.out_dir) / "run_config.json", cfg.to_json_string());
    log << "database: " << db.case_count() << " cases x " << db.beam_count() << " beams x "
        << db.samples_per_case << " reps = " << db.records.size() << " records -> "
        << dir.string() << "\n";
    return dir.string();
}

void stage_preprocess(const RunConfig& cfg, bool without_ris, std::ostream& log) {
    fs::path dir = db_dir(cfg, without_ris);
    if (!fs::exists(dir / "manifest.json"))
        throw std::runtime_error("no database at " + dir.string() +
                                 "; run `wiris simulate` first");
    FingerprintDatabase db = FingerprintDatabase::load(dir.string());
    std::vector<FeatureRow> rows = build_feature_rows(db);
    std::string jsonl = features_to_jsonl(rows);

    json manifest = {{"schema", "wiris.features/1"},
                     {"records_hash", manifest_records_hash(dir)},
                     {"features_hash", content_hash(jsonl)},
                     {"length", rows.empty() ? 0 : static_cast<int>(rows[0].values.size())}};
    write_file(dir / "features.jsonl", jsonl);
    write_file(dir / "features_manifest.json", manifest.dump(2));
    log << "features: " << rows.size() << " vectors of length "
        << (rows.empty() ? 0 : rows[0].values.size()) << " -> "
        << (dir / "features.jsonl").string() << "\n";
}

namespace {

struct LoadedFeatures {
    FingerprintDatabase db;
    std::vector<FeatureRow> rows;
    std::string features_hash;
};

LoadedFeatures load_features(const RunConfig& cfg, bool without_ris) {
    fs::path dir = db_dir(cfg, without_ris);
    if (!fs::exists(dir / "features.jsonl"))
        throw std::runtime_error("no features at " + dir.string() +
                                 "; run `wiris preprocess` first");
    LoadedFeatures out;
    out.db = FingerprintDatabase::load(dir.string());
    json fman = json::parse(read_file(dir / "features_manifest.json"));
    if (fman.at("schema").get<std::string>() != "wiris.features/1")
        throw std::runtime_error("features schema mismatch in " + dir.string());
    if (fman.at("records_hash").get<std::string>() != manifest_records_hash(dir))
        throw std::runtime_error("features in " + dir.string() +
                                 " were built from a different database; re-run "
                                 "`wiris preprocess`");
    std::string jsonl = read_file(dir / "features.jsonl");
    if (fman.at("features_hash").get<std::string>() != content_hash(jsonl))
        throw std::runtime_error("features.jsonl in " + dir.string() +
                                 " does not match its manifest; re-run `wiris preprocess`");
    out.rows = features_from_jsonl(jsonl);
    out.features_hash = fman.at("features_hash").get<std::string>();
    return out;
}

}  // namespace

void stage_train(const RunConfig& cfg, bool without_ris, std::ostream& log) {
    LoadedFeatures lf = load_features(cfg, without_ris);
    int input_len = lf.rows.empty() ? 0 : static_cast<int>(lf.rows[0].values.size());

    TrainData data;
    for (const FeatureRow& r : lf.rows) {
        TrainExample ex;
        ex.features = r.values;
        ex.target = lf.db.labels.at(r.case_id).ids;
        if (r.split == Split::train) data.train.push_back(std::move(ex));
        else if (r.split == Split::val) data.val.push_back(std::move(ex));
    }
    log << "train: " << data.train.size() << " train / " << data.val.size()
        << " val examples, input length " << input_len << "\n";

    TokenVocab vocab(lf.db.scene.reference_points);
    Transformer model(cfg.model_config(input_len), vocab);
    TrainOptions opts = cfg.train_options;
    opts.shuffle_seed = cfg.model_seed;
    TrainLog tlog = model.train(data, opts);

    fs::path dir = arm_dir(cfg, without_ris);
    write_file(dir / "checkpoint.json", model.to_checkpoint_json(lf.features_hash));
    write_file(dir / "train_log.csv", tlog.to_csv());
    log << "trained " << tlog.steps_run << " steps";
    if (!tlog.rows.empty() && std::isfinite(tlog.rows.back().val_loss))
        log << ", best val loss " << tlog.best_val_loss << " @ step " << tlog.best_step;
    log << " -> " << (dir / "checkpoint.json").string() << "\n";
}

EvalReport stage_evaluate(const RunConfig& cfg, bool without_ris, std::ostream& log) {
    LoadedFeatures lf = load_features(cfg, without_ris);
    fs::path dir = arm_dir(cfg, without_ris);
    if (!fs::exists(dir / "checkpoint.json"))
        throw std::runtime_error("no checkpoint at " + dir.string() + "; run `wiris train` first");
    std::string ck_text = read_file(dir / "checkpoint.json");
    if (Transformer::checkpoint_features_hash(ck_text) != lf.features_hash)
        throw std::runtime_error("checkpoint at " + dir.string() +
                                 " was trained on different features; re-run `wiris train`");
    Transformer model = Transformer::from_checkpoint_json(ck_text);

    std::vector<const FeatureRow*> test_rows;
    for (const FeatureRow& r : lf.rows) {
        if (r.split == Split::test) test_rows.push_back(&r);
    }
    if (test_rows.empty()) throw std::runtime_error("test split is empty");

    std::vector<TokenSequence> predictions(test_rows.size());
    parallel_for(test_rows.size(), [&](size_t i) {
        predictions[i] = model.predict(test_rows[i]->values);
    });
    std::vector<int> label_ids;
    label_ids.reserve(test_rows.size());
    for (const FeatureRow* r : test_rows) label_ids.push_back(r->case_id);

    EvalReport report = evaluate_predictions(predictions, label_ids, lf.db.cases, lf.db.scene,
                                             model.vocab());
    report.with_ris = !without_ris;
    report.profile = cfg.model_profile;
    report.seed = cfg.master_seed;

    write_file(dir / "report.json", report.to_json_string());
    write_file(dir / "cdf.csv", report.cdf_csv());
    write_file(dir / "confusion.csv", report.confusion_csv());
    log << (without_ris ? "without" : "with") << "-RIS: counting " << report.counting.overall
        << " (" << report.counting.correct << "/" << report.counting.total << "), median error "
        << report.median_error_m << " m -> " << (dir / "report.json").string() << "\n";
    return report;
}

std::vector<SeedOutcome> stage_reproduce(const RunConfig& cfg, std::ostream& log) {
    std::vector<SeedOutcome> outcomes;
    for (uint64_t seed : cfg.seeds) {
        RunConfig run = cfg;
        run.apply_seed(seed);
        run.out_dir = (fs::path(cfg.out_dir) / ("seed" + std::to_string(seed))).string();
        log << "=== seed " << seed << " ===\n";
        SeedOutcome outcome;
        outcome.seed = seed;
        for (bool without : {false, true}) {
            stage_simulate(run, without, log);
            stage_preprocess(run, without, log);
            stage_train(run, without, log);
            EvalReport report = stage_evaluate(run, without, log);
            (without ? outcome.without_ris : outcome.with_ris) = report;
        }
        outcome.comparison = compare(outcome.with_ris, outcome.without_ris);
        write_file(fs::path(run.out_dir) / "comparison.json",
                   outcome.comparison.to_json_string());
        log << outcome.comparison.table();
        outcomes.push_back(std::move(outcome));
    }
    log << "=== summary ===\n";
    for (const SeedOutcome& o : outcomes) {
        log << "seed " << o.seed << ": with " << o.with_ris.counting.overall << ", without "
            << o.without_ris.counting.overall << ", delta "
            << o.with_ris.counting.overall - o.without_ris.counting.overall << ", median "
            << o.with_ris.median_error_m << " m\n";
    }
    return outcomes;
}

}  // namespace wiris
