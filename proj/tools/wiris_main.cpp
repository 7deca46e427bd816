#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wiris/file_io.hpp"
#include "wiris/pipeline.hpp"

namespace {

wiris::RunConfig load_config(const std::string& config_path, const std::string& out_override,
                             std::optional<uint64_t> seed_override,
                             const std::string& profile_override) {
    wiris::RunConfig cfg = config_path.empty()
                               ? wiris::RunConfig::desk_default()
                               : wiris::RunConfig::from_json_string(wiris::read_file(config_path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override) cfg.apply_seed(*seed_override);
    if (!profile_override.empty()) cfg.model_profile = profile_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-assisted Wi-Fi CSI sensing pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::string profile;
    std::optional<uint64_t> seed;
    bool without_ris = false;

    app.add_option("--config", config_path, "run configuration JSON (defaults to desk profile)");
    app.add_option("--out", out_dir, "output directory override");
    app.add_option("--seed", seed, "override master/split/model seeds");
    app.add_option("--profile", profile, "model profile: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_flag("--without-ris", without_ris, "operate on the no-RIS baseline database");

    auto* cmd_codebook = app.add_subcommand("codebook", "build and verify the beam set");
    auto* cmd_simulate = app.add_subcommand("simulate", "enumerate cases and build the database");
    auto* cmd_preprocess = app.add_subcommand("preprocess", "normalize and concatenate features");
    auto* cmd_train = app.add_subcommand("train", "train the sequence model");
    auto* cmd_evaluate = app.add_subcommand("evaluate", "score the test split");
    auto* cmd_reproduce =
        app.add_subcommand("reproduce", "full with/without-RIS comparison over all seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        wiris::RunConfig cfg = load_config(config_path, out_dir, seed, profile);
        if (cmd_codebook->parsed()) {
            wiris::stage_codebook(cfg, std::cout);
        } else if (cmd_simulate->parsed()) {
            wiris::stage_simulate(cfg, without_ris, std::cout);
        } else if (cmd_preprocess->parsed()) {
            wiris::stage_preprocess(cfg, without_ris, std::cout);
        } else if (cmd_train->parsed()) {
            wiris::stage_train(cfg, without_ris, std::cout);
        } else if (cmd_evaluate->parsed()) {
            wiris::stage_evaluate(cfg, without_ris, std::cout);
        } else if (cmd_reproduce->parsed()) {
            wiris::stage_reproduce(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
