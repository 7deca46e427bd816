#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wiris/dataset.hpp"
#include "wiris/eval.hpp"
#include "wiris/model.hpp"

namespace wiris {

/// One run of the pipeline, file-driven. Every seed is explicit.
struct RunConfig {
    std::string scene_ref = "builtin:desk";  // builtin name or path to scene.json
    RadioConfig radio;

    double codebook_incidence_deg = 0.0;
    std::vector<double> codebook_angles_deg = {10, 20, 30, 40, 50, 60};
    Quantization codebook_quantization = Quantization::one_bit;

    int max_people = 3;
    int samples_per_case = 100;
    SplitCounts split_counts{60, 20, 20};
    SplitMode split_mode = SplitMode::repetition;
    uint64_t split_seed = 1;
    uint64_t master_seed = 1;

    std::string model_profile = "desk";  // desk | paper | custom
    int custom_d_model = 64;
    int custom_heads = 4;
    int custom_encoder_layers = 2;
    int custom_decoder_layers = 2;
    int custom_ffn_dim = 256;
    double dropout = 0.0;
    uint64_t model_seed = 1;
    TrainOptions train_options;

    std::string out_dir = "out";
    std::vector<uint64_t> seeds = {1, 2, 3};

    /// Desk-scale defaults matching the experiment-style setup:
    /// 4-point grid, 6 one-bit beams, 100 repetitions per case, 60/20/20.
    static RunConfig desk_default();

    static RunConfig from_json_string(const std::string& text);
    std::string to_json_string() const;

    Scene load_scene() const;
    /// Sets master, split, and model seeds at once.
    void apply_seed(uint64_t seed);

    ModelConfig model_config(int input_len) const;
};

/// Builds the codebook, prints a gain-sweep summary per beam, writes
/// <out>/codebook.json.
Codebook stage_codebook(const RunConfig& cfg, std::ostream& log);

/// Enumerates cases, simulates the database (with-RIS codebook or the
/// all-off baseline), splits it, and saves it. Returns the database path.
std::string stage_simulate(const RunConfig& cfg, bool without_ris, std::ostream& log);

/// Normalizes and concatenates features into <db>/features.jsonl.
void stage_preprocess(const RunConfig& cfg, bool without_ris, std::ostream& log);

/// Trains on the train/val splits, writes checkpoint.json and train_log.csv.
void stage_train(const RunConfig& cfg, bool without_ris, std::ostream& log);

/// Evaluates the checkpoint on the test split; writes report.json, cdf.csv,
/// confusion.csv. Returns the report.
EvalReport stage_evaluate(const RunConfig& cfg, bool without_ris, std::ostream& log);

struct SeedOutcome {
    uint64_t seed = 0;
    EvalReport with_ris;
    EvalReport without_ris;
    ComparisonSummary comparison;
};

/// Full with/without-RIS comparison across cfg.seeds; prints the table and
/// writes comparison.json per seed.
std::vector<SeedOutcome> stage_reproduce(const RunConfig& cfg, std::ostream& log);

}  // namespace wiris
