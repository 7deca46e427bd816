// Acceptance suite: runs every criterion at its stated tolerance and prints
// one [PASS]/[FAIL] line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include "wiris/channel.hpp"
#include "wiris/dataset.hpp"
#include "wiris/eval.hpp"
#include "wiris/file_io.hpp"
#include "wiris/model.hpp"
#include "wiris/pipeline.hpp"
#include "wiris/preprocess.hpp"
#include "wiris/rng.hpp"

using namespace wiris;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    if (!ok) g_failures += 1;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Scene open_scene(int grid_side) {
    Scene s;
    s.room_polygon = {{-20, -20}, {20, -20}, {20, 20}, {-20, 20}};
    s.tx_positions = {{-15.0, 0.0, 1.5}};
    s.rx_positions = {{15.0, 0.0, 1.5}};
    s.ris_panel = make_grid_panel({-19.9, 0.0, 1.5}, {1, 0, 0}, 1, 2, 0.02);
    for (int gy = 0; gy < grid_side; ++gy) {
        for (int gx = 0; gx < grid_side; ++gx)
            s.reference_points.push_back({1.0 + gx, 1.0 + gy});
    }
    return s;
}

Codebook beams_for(const Scene& s, int count) {
    std::vector<double> angles;
    for (int i = 0; i < count; ++i) angles.push_back(10.0 * i);
    return build_codebook(s.ris_panel, 0.0, angles, Quantization::continuous,
                          RadioConfig{}.wavelength_m());
}

void criterion1_combinatorics() {
    auto start = Clock::now();
    bool ok = true;
    std::ostringstream detail;

    size_t c16 = enumerate_cases(16, 3).size();
    size_t c4 = enumerate_cases(4, 3).size();
    ok &= c16 == 696;
    ok &= c4 == 14;

    RadioConfig radio;
    radio.subcarrier_count = 2;
    Scene s16 = open_scene(4);
    FingerprintDatabase db16 =
        build_database(s16, radio, beams_for(s16, 9), enumerate_cases(16, 3), 1, 1);
    ok &= db16.records.size() == 6264;

    Scene s4 = open_scene(2);
    FingerprintDatabase db4 =
        build_database(s4, radio, beams_for(s4, 6), enumerate_cases(4, 3), 1, 1);
    ok &= db4.records.size() == 84;

    double elapsed = seconds_since(start);
    ok &= elapsed < 1.0;
    detail << "cases 16/3=" << c16 << ", 4/3=" << c4 << ", records " << db16.records.size()
           << " and " << db4.records.size() << ", " << elapsed << " s";
    report(1, "combinatorics exact", ok, detail.str());
}

void criterion2_codebook() {
    auto start = Clock::now();
    bool ok = true;
    std::ostringstream detail;
    double wavelength = RadioConfig{}.wavelength_m();
    RisPanel panel = make_grid_panel({0, 0, 1.5}, {1, 0, 0}, 10, 10, wavelength / 2.0);

    Codebook cont = build_codebook(panel, 0.0, {0, 10, 20, 30, 40, 50, 60, 70, 80},
                                   Quantization::continuous, wavelength);
    double worst_gain_err = 0.0;
    for (const auto& beam : cont.beams) {
        double g = array_gain(panel, beam, 0.0, beam.beam_label_deg, wavelength);
        worst_gain_err = std::max(worst_gain_err, std::abs(g - 1.0));
    }
    ok &= worst_gain_err <= 1e-9;

    Codebook onebit = build_codebook(panel, 0.0, {10, 20, 30, 40, 50, 60}, Quantization::one_bit,
                                     wavelength);
    double worst_offset = 0.0;
    for (const auto& beam : onebit.beams) {
        // 1-bit phases mirror an equal lobe into -theta_r; sweep the steered
        // half-plane for the argmax.
        double best_gain = -1.0, best_theta = 0.0;
        for (double theta = 0.0; theta <= 90.0; theta += 0.5) {
            double g = array_gain(panel, beam, 0.0, theta, wavelength);
            if (g > best_gain) {
                best_gain = g;
                best_theta = theta;
            }
        }
        worst_offset = std::max(worst_offset, std::abs(best_theta - beam.beam_label_deg));
    }
    ok &= worst_offset <= 5.0;

    double elapsed = seconds_since(start);
    ok &= elapsed < 10.0;
    detail << "continuous |gain-1| max " << worst_gain_err << ", one-bit peak offset max "
           << worst_offset << " deg, " << elapsed << " s";
    report(2, "codebook gains", ok, detail.str());
}

void criterion3_channel() {
    bool ok = true;
    std::ostringstream detail;
    Scene s = open_scene(2);
    s.ris_panel = make_grid_panel({-19.9, 0.0, 1.5}, {1, 0, 0}, 3, 3,
                                  RadioConfig{}.wavelength_m() / 2.0);
    RadioConfig radio;
    radio.subcarrier_count = 8;

    RisConfiguration off;
    off.amplitudes.assign(9, 0.0);
    off.phases.assign(9, 0.0);
    EffectiveChannel direct = scene_channel(s, radio, off, {});
    std::vector<double> freqs = radio.subcarrier_frequencies();
    bool direct_exact = true;
    for (int k = 0; k < radio.subcarrier_count; ++k)
        direct_exact &= direct.at(k, 0) ==
                        path_response(s.tx_positions[0], s.rx_positions[0], freqs[k]);
    ok &= direct_exact;
    detail << "theta=0 reproduces D: " << (direct_exact ? "exact" : "MISMATCH");

    Rng rng(2);
    RisConfiguration full;
    for (int n = 0; n < 9; ++n) {
        full.amplitudes.push_back(rng.uniform());
        full.phases.push_back(rng.uniform() * 6.28);
    }
    RisConfiguration a = full, b = full;
    for (int n = 0; n < 9; ++n) (n % 2 == 0 ? a : b).amplitudes[n] = 0.0;
    EffectiveChannel ch_full = scene_channel(s, radio, full, {});
    EffectiveChannel ch_a = scene_channel(s, radio, a, {});
    EffectiveChannel ch_b = scene_channel(s, radio, b, {});
    double worst_rel = 0.0;
    for (size_t i = 0; i < ch_full.values.size(); ++i) {
        std::complex<double> lhs = ch_full.values[i] + direct.values[i];
        std::complex<double> rhs = ch_a.values[i] + ch_b.values[i];
        worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / std::abs(lhs));
    }
    ok &= worst_rel <= 1e-12;
    detail << "; partition linearity rel " << worst_rel;

    CsiSample s1 = add_noise(scene_channel(s, radio, full, {{1.0, 1.0}}), radio, 42);
    CsiSample s2 = add_noise(scene_channel(s, radio, full, {{1.0, 1.0}}), radio, 42);
    bool reproducible = s1.amplitudes == s2.amplitudes;
    ok &= reproducible;
    detail << "; same-seed " << (reproducible ? "byte-exact" : "MISMATCH");

    EffectiveChannel zero;
    zero.subcarriers = 10;
    zero.pairs = 1;
    zero.values.assign(10, {0.0, 0.0});
    double sum = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        CsiSample sample = add_noise(zero, radio, 7000 + rep);
        for (double amp : sample.amplitudes) sum += amp * amp;
    }
    double mean = sum / 1e5;
    double rel = std::abs(mean - radio.noise_power_mw()) / radio.noise_power_mw();
    ok &= rel <= 0.02;
    detail << "; noise variance rel err " << rel << " over 1e5 draws";

    report(3, "channel properties", ok, detail.str());
}

void criterion4_preprocess() {
    bool ok = true;
    std::ostringstream detail;
    Rng rng(3);

    bool range_ok = true, affine_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(24);
        for (double& x : v) x = rng.gaussian() * 10.0;
        std::vector<double> n = maxmin_normalize(v);
        double lo = 1.0, hi = 0.0;
        for (double x : n) {
            range_ok &= x >= 0.0 && x <= 1.0;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        range_ok &= lo == 0.0 && hi == 1.0;
        double c = 0.5 + rng.uniform() * 3.0, b = rng.gaussian();
        std::vector<double> w(v.size());
        for (size_t i = 0; i < v.size(); ++i) w[i] = c * v[i] + b;
        std::vector<double> n2 = maxmin_normalize(w);
        for (size_t i = 0; i < v.size(); ++i)
            affine_ok &= std::abs(n[i] - n2[i]) <= 1e-12;
    }
    bool degenerate_ok = maxmin_normalize({2.0, 2.0}) == std::vector<double>{0.0, 0.0};
    ok &= range_ok && affine_ok && degenerate_ok;
    detail << "range/extremes " << (range_ok ? "ok" : "FAIL") << ", affine invariance "
           << (affine_ok ? "ok" : "FAIL") << ", degenerate " << (degenerate_ok ? "ok" : "FAIL");

    // index bijection on random tensors
    bool bijection_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
        int k_sub = 3 + static_cast<int>(rng.below(6));
        int pairs = 1 + static_cast<int>(rng.below(3));
        int beams = 1 + static_cast<int>(rng.below(4));
        std::vector<CsiSample> group;
        for (int r = 0; r < beams; ++r) {
            CsiSample smp;
            smp.beam_index = r;
            smp.subcarriers = k_sub;
            smp.pairs = pairs;
            for (int i = 0; i < k_sub * pairs; ++i) smp.amplitudes.push_back(rng.uniform());
            group.push_back(std::move(smp));
        }
        FeatureVector fv = concat_features(group);
        std::vector<int> hits(fv.length(), 0);
        for (int p = 0; p < pairs; ++p) {
            for (int r = 0; r < beams; ++r) {
                std::vector<double> block(k_sub);
                for (int k = 0; k < k_sub; ++k) block[k] = group[r].at(k, p);
                std::vector<double> norm = maxmin_normalize(block);
                for (int k = 0; k < k_sub; ++k) {
                    int pos = (p * beams + r) * k_sub + k;
                    hits[pos] += 1;
                    bijection_ok &= fv.values[pos] == norm[k];
                }
            }
        }
        for (int h : hits) bijection_ok &= h == 1;
    }
    ok &= bijection_ok;
    detail << ", index bijection " << (bijection_ok ? "ok" : "FAIL");
    report(4, "preprocess properties", ok, detail.str());
}

void criterion5_model() {
    auto start = Clock::now();
    bool ok = true;
    std::ostringstream detail;

    TokenVocab vocab({{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}, {2.0, 2.0}});
    ModelConfig tiny;
    tiny.d_model = 8;
    tiny.head_count = 2;
    tiny.encoder_layers = 1;
    tiny.decoder_layers = 1;
    tiny.ffn_dim = 16;
    tiny.input_len = 6;
    tiny.max_decode_len = 8;
    tiny.seed = 51;
    Transformer model(tiny, vocab);
    Rng rng(52);
    auto feats = [&](int n) {
        std::vector<double> f(n);
        for (double& v : f) v = rng.uniform();
        return f;
    };
    TrainExample ex1{feats(6), {TokenVocab::kSos, 3, 5, TokenVocab::kEos}};
    TrainExample ex2{feats(6), {TokenVocab::kSos, 4, 6, 3, 5, TokenVocab::kEos}};
    double grad_err = model.gradient_check({&ex1, &ex2}, 150, 53);
    ok &= grad_err < 1e-4;
    detail << "gradient check " << grad_err;

    // softmax rows sum to one; masked upper triangle exactly zero
    ad::Mat q(3, 4), k(3, 4);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
            q(i, j) = rng.gaussian();
            k(i, j) = rng.gaussian();
        }
    }
    ad::MaskMat mask = causal_mask(3);
    ad::Mat weights = scaled_dot_attention(q, k, ad::Mat::Identity(3, 3), &mask);
    bool softmax_ok = true;
    for (int i = 0; i < 3; ++i) {
        softmax_ok &= std::abs(weights.row(i).sum() - 1.0) <= 1e-6;
        for (int j = i + 1; j < 3; ++j) softmax_ok &= weights(i, j) == 0.0;
    }
    ok &= softmax_ok;
    detail << ", softmax rows " << (softmax_ok ? "ok" : "FAIL");

    // causal independence, exact
    ad::Mat memory = model.encode(ex1.features);
    ad::Mat base = model.decode_all_logits(memory, {TokenVocab::kSos, 3, 5});
    ad::Mat perturbed = model.decode_all_logits(memory, {TokenVocab::kSos, 3, 6});
    bool causal_ok = (base.row(0) - perturbed.row(0)).cwiseAbs().maxCoeff() == 0.0 &&
                     (base.row(1) - perturbed.row(1)).cwiseAbs().maxCoeff() == 0.0;
    ok &= causal_ok;
    detail << ", causal independence " << (causal_ok ? "exact" : "FAIL");

    // overfit sanity: 4-case database, 100% train sequence accuracy
    Scene s4 = open_scene(2);
    RadioConfig radio;
    radio.subcarrier_count = 8;
    radio.tx_power_dbm = 20.0;
    Codebook book = beams_for(s4, 2);
    FingerprintDatabase db =
        build_database(s4, radio, book, enumerate_cases(4, 1), 4, 54);
    split_database(db, {4, 0, 0}, 55);
    TokenVocab db_vocab(s4.reference_points);
    TrainData data;
    for (int c = 0; c < db.case_count(); ++c) {
        for (int rep = 0; rep < db.samples_per_case; ++rep) {
            std::vector<CsiSample> group;
            for (int r = 0; r < db.beam_count(); ++r) group.push_back(db.record_at(c, r, rep));
            TrainExample ex;
            ex.features = concat_features(group).values;
            ex.target = db.labels[c].ids;
            data.train.push_back(std::move(ex));
        }
    }
    ModelConfig overfit_cfg;
    overfit_cfg.d_model = 32;
    overfit_cfg.head_count = 4;
    overfit_cfg.encoder_layers = 1;
    overfit_cfg.decoder_layers = 1;
    overfit_cfg.ffn_dim = 64;
    overfit_cfg.input_len = static_cast<int>(data.train[0].features.size());
    overfit_cfg.max_decode_len = 4;
    overfit_cfg.seed = 56;
    Transformer overfit(overfit_cfg, db_vocab);
    TrainOptions opts;
    opts.max_steps = 2000;
    opts.batch_size = 8;
    opts.learning_rate = 1e-3;
    opts.eval_every = 25;
    opts.shuffle_seed = 57;
    opts.stop_train_seq_acc = 1.0;
    TrainLog tlog = overfit.train(data, opts);
    std::vector<const TrainExample*> all;
    for (const TrainExample& ex : data.train) all.push_back(&ex);
    double seq_acc = overfit.sequence_accuracy(all);
    ok &= seq_acc == 1.0 && tlog.steps_run <= 2000;
    detail << ", overfit seq acc " << seq_acc << " after " << tlog.steps_run << " steps";

    double elapsed = seconds_since(start);
    ok &= elapsed < 300.0;
    detail << ", " << elapsed << " s";
    report(5, "model numerics", ok, detail.str());
}

void criterion6_matching() {
    bool ok = true;
    std::ostringstream detail;
    Rng rng(61);

    // recursive oracle, independent of the next_permutation implementation
    auto oracle_total = [](const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
        std::vector<bool> used(a.size(), false);
        auto rec = [&](auto&& self, size_t i) -> double {
            if (i == b.size()) return 0.0;
            double best = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < a.size(); ++j) {
                if (used[j]) continue;
                used[j] = true;
                best = std::min(best, distance(a[j], b[i]) + self(self, i + 1));
                used[j] = false;
            }
            return best;
        };
        return rec(rec, 0);
    };

    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        size_t n = 1 + trial % 3;
        std::vector<Vec2> a(n), b(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = {rng.uniform() * 5.0, rng.uniform() * 5.0};
            b[i] = {rng.uniform() * 5.0, rng.uniform() * 5.0};
        }
        double total = 0.0;
        for (double d : matched_distances(a, b)) total += d;
        worst = std::max(worst, std::abs(total - oracle_total(a, b)));
    }
    ok &= worst <= 1e-9;
    detail << "matching vs factorial oracle, max deviation " << worst << " over 1000 instances";

    // conditioning and trace identities on a synthetic prediction set
    Scene s = open_scene(2);
    TokenVocab vocab(s.reference_points);
    auto cases = enumerate_cases(4, 3);
    std::vector<TokenSequence> preds, labels;
    std::vector<int> label_ids;
    long expected_errors = 0;
    int exact = 0;
    for (int i = 0; i < 300; ++i) {
        const PlacementCase& truth = cases[rng.below(cases.size())];
        const PlacementCase& guess = cases[rng.below(cases.size())];
        labels.push_back(label_sequence(truth, s, vocab));
        preds.push_back(label_sequence(guess, s, vocab));
        label_ids.push_back(truth.case_id);
        if (truth.occupied.size() == guess.occupied.size())
            expected_errors += static_cast<long>(truth.occupied.size());
        if (truth.case_id == guess.case_id) exact += 1;
    }
    std::vector<double> errors = localization_errors(preds, labels, vocab);
    bool conditioning_ok = static_cast<long>(errors.size()) == expected_errors;
    ConfusionMatrix cm = confusion_matrix(preds, label_ids, cases, s, vocab);
    CountingAccuracy acc = counting_accuracy(preds, labels, vocab);
    bool trace_ok = cm.trace() == exact && cm.total() == 300;
    bool order_ok = static_cast<double>(cm.trace()) / cm.total() <= acc.overall + 1e-12;
    ok &= conditioning_ok && trace_ok && order_ok;
    detail << "; conditioning " << (conditioning_ok ? "ok" : "FAIL") << ", trace "
           << (trace_ok ? "ok" : "FAIL") << ", exact<=counting " << (order_ok ? "ok" : "FAIL");
    report(6, "eval oracle", ok, detail.str());
}

void criterion7_end_to_end(const fs::path& out_root) {
    auto start = Clock::now();
    bool ok = true;
    std::ostringstream detail;

    RunConfig cfg = RunConfig::desk_default();
    cfg.out_dir = (out_root / "reproduce").string();
    cfg.seeds = {1, 2, 3};

    std::vector<SeedOutcome> outcomes = stage_reproduce(cfg, std::cout);
    double grid_spacing = 1.0;
    for (const SeedOutcome& o : outcomes) {
        double with_acc = o.with_ris.counting.overall;
        double without_acc = o.without_ris.counting.overall;
        double med = o.with_ris.median_error_m;
        bool a = with_acc >= 0.90;
        bool b = with_acc - without_acc >= 0.10;
        bool c = med <= grid_spacing / 2.0;
        ok &= a && b && c;
        detail << "seed " << o.seed << ": with " << with_acc << (a ? "" : " (<0.90 FAIL)")
               << ", without " << without_acc << ", gap " << with_acc - without_acc
               << (b ? "" : " (<0.10 FAIL)") << ", median " << med << " m"
               << (c ? "" : " (>0.5 FAIL)") << "; ";
    }
    double elapsed = seconds_since(start);
    ok &= elapsed < 1800.0;
    detail << elapsed << " s";
    report(7, "end-to-end desk reproduction", ok, detail.str());
}

void criterion8_reference_metadata(const fs::path& out_root) {
    bool ok = true;
    std::ostringstream detail;
    fs::path report_path = out_root / "reproduce" / "seed1" / "with" / "report.json";
    if (!fs::exists(report_path)) {
        report(8, "reference metadata", false, "missing " + report_path.string());
        return;
    }
    std::string text = read_file(report_path);
    ok &= text.find("reference_paper_metrics") != std::string::npos;
    ok &= text.find("\"binding\": false") != std::string::npos;
    ok &= text.find("0.9988") != std::string::npos;
    ok &= text.find("0.9933") != std::string::npos;
    ok &= text.find("0.95") != std::string::npos;
    ok &= text.find("0.6526") != std::string::npos;
    ok &= text.find("0.9807") != std::string::npos;
    detail << "experiment accuracies recorded non-binding in report.json: "
           << (ok ? "present" : "MISSING");
    report(8, "reference metadata", ok, detail.str());
}

}  // namespace

int main() {
    fs::path out_root = fs::temp_directory_path() / "wiris_acceptance";
    fs::remove_all(out_root);
    fs::create_directories(out_root);

    criterion1_combinatorics();
    criterion2_codebook();
    criterion3_channel();
    criterion4_preprocess();
    criterion5_model();
    criterion6_matching();
    criterion7_end_to_end(out_root);
    criterion8_reference_metadata(out_root);

    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures);
    return g_failures;
}
