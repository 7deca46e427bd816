#include "wiris/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wiris {

using nlohmann::json;

CountingAccuracy counting_accuracy(const std::vector<TokenSequence>& predictions,
                                   const std::vector<TokenSequence>& labels,
                                   const TokenVocab& vocab) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("counting_accuracy: prediction/label length mismatch");
    CountingAccuracy acc;
    std::map<int, int> correct_per_count;
    for (size_t i = 0; i < predictions.size(); ++i) {
        int truth = person_count(labels[i], vocab);
        if (truth < 0) throw std::invalid_argument("counting_accuracy: malformed label");
        int got = person_count(predictions[i], vocab);
        acc.per_count_totals[truth] += 1;
        acc.total += 1;
        if (got == truth) {
            correct_per_count[truth] += 1;
            acc.correct += 1;
        }
    }
    for (const auto& [count, total] : acc.per_count_totals)
        acc.per_count[count] = static_cast<double>(correct_per_count[count]) / total;
    acc.overall = acc.total == 0 ? 0.0 : static_cast<double>(acc.correct) / acc.total;
    return acc;
}

std::vector<double> matched_distances(const std::vector<Vec2>& predicted,
                                      const std::vector<Vec2>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("matched_distances: size mismatch");
    size_t n = truth.size();
    if (n == 0) return {};
    if (n > 8) throw std::invalid_argument("matched_distances: exhaustive search capped at n=8");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_total = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) total += distance(predicted[perm[i]], truth[i]);
        if (total < best_total) {
            best_total = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = distance(predicted[best[i]], truth[i]);
    return out;
}

std::vector<double> localization_errors(const std::vector<TokenSequence>& predictions,
                                        const std::vector<TokenSequence>& labels,
                                        const TokenVocab& vocab) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("localization_errors: prediction/label length mismatch");
    std::vector<double> errors;
    for (size_t i = 0; i < predictions.size(); ++i) {
        int truth = person_count(labels[i], vocab);
        int got = person_count(predictions[i], vocab);
        if (got < 0 || got != truth) continue;  // counting failures are scored elsewhere
        std::vector<Vec2> p = decode_positions(predictions[i], vocab);
        std::vector<Vec2> t = decode_positions(labels[i], vocab);
        for (double d : matched_distances(p, t)) errors.push_back(d);
    }
    return errors;
}

std::vector<std::pair<double, double>> cdf(std::vector<double> errors) {
    std::vector<std::pair<double, double>> points;
    if (errors.empty()) return points;
    std::sort(errors.begin(), errors.end());
    size_t n = errors.size();
    for (size_t i = 0; i < n; ++i) {
        double frac = static_cast<double>(i + 1) / n;
        if (!points.empty() && points.back().first == errors[i]) {
            points.back().second = frac;
        } else {
            points.emplace_back(errors[i], frac);
        }
    }
    return points;
}

long ConfusionMatrix::trace() const {
    long t = 0;
    for (size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

namespace {

/// Reference-point index for exact coordinates, -1 when off-grid.
int ref_index(const Vec2& p, const Scene& scene) {
    for (int i = 0; i < scene.reference_point_count(); ++i) {
        if (scene.reference_points[i].x == p.x && scene.reference_points[i].y == p.y) return i;
    }
    return -1;
}

}  // namespace

ConfusionMatrix confusion_matrix(const std::vector<TokenSequence>& predictions,
                                 const std::vector<int>& label_case_ids,
                                 const std::vector<PlacementCase>& cases, const Scene& scene,
                                 const TokenVocab& vocab) {
    if (predictions.size() != label_case_ids.size())
        throw std::invalid_argument("confusion_matrix: prediction/label length mismatch");
    int c = static_cast<int>(cases.size());
    std::map<std::vector<int>, int> case_of_set;
    for (const PlacementCase& pc : cases) case_of_set[pc.occupied] = pc.case_id;

    ConfusionMatrix cm;
    cm.counts.assign(c, std::vector<int>(c + 1, 0));
    for (size_t i = 0; i < predictions.size(); ++i) {
        int row = label_case_ids[i];
        if (row < 0 || row >= c) throw std::invalid_argument("confusion_matrix: bad case id");
        int col = c;  // other
        if (is_well_formed(predictions[i], vocab)) {
            std::vector<int> occupied;
            bool on_grid = true;
            for (const Vec2& p : decode_positions(predictions[i], vocab)) {
                int idx = ref_index(p, scene);
                if (idx < 0) {
                    on_grid = false;
                    break;
                }
                occupied.push_back(idx);
            }
            if (on_grid) {
                std::sort(occupied.begin(), occupied.end());
                occupied.erase(std::unique(occupied.begin(), occupied.end()), occupied.end());
                auto it = case_of_set.find(occupied);
                if (it != case_of_set.end()) col = it->second;
            }
        }
        cm.counts[row][col] += 1;
    }
    return cm;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

EvalReport evaluate_predictions(const std::vector<TokenSequence>& predictions,
                                const std::vector<int>& label_case_ids,
                                const std::vector<PlacementCase>& cases, const Scene& scene,
                                const TokenVocab& vocab) {
    std::vector<TokenSequence> labels;
    labels.reserve(label_case_ids.size());
    for (int id : label_case_ids) {
        PlacementCase pc = cases.at(id);
        labels.push_back(label_sequence(pc, scene, vocab));
    }
    EvalReport report;
    report.counting = counting_accuracy(predictions, labels, vocab);
    report.error_samples = localization_errors(predictions, labels, vocab);
    report.cdf_points = cdf(report.error_samples);
    report.confusion = confusion_matrix(predictions, label_case_ids, cases, scene, vocab);
    report.median_error_m = median(report.error_samples);
    report.mean_error_m =
        report.error_samples.empty()
            ? std::numeric_limits<double>::quiet_NaN()
            : std::accumulate(report.error_samples.begin(), report.error_samples.end(), 0.0) /
                  report.error_samples.size();
    return report;
}

std::string EvalReport::to_json_string() const {
    json j;
    j["with_ris"] = with_ris;
    j["profile"] = profile;
    j["seed"] = seed;
    json per_count = json::object();
    for (const auto& [count, acc] : counting.per_count)
        per_count[std::to_string(count)] = {{"accuracy", acc},
                                            {"samples", counting.per_count_totals.at(count)}};
    j["counting"] = {{"overall", counting.overall},
                     {"correct", counting.correct},
                     {"total", counting.total},
                     {"per_count", per_count}};
    j["localization"] = {{"median_m", median_error_m},
                         {"mean_m", mean_error_m},
                         {"samples", error_samples.size()}};
    json cdf_j = json::array();
    for (const auto& [v, f] : cdf_points) cdf_j.push_back({{"error_m", v}, {"fraction", f}});
    j["cdf"] = cdf_j;
    json conf = json::array();
    for (const auto& row : confusion.counts) conf.push_back(row);
    j["confusion"] = {{"matrix", std::move(conf)},
                      {"columns", "case index, last column = other"},
                      {"trace", confusion.trace()},
                      {"total", confusion.total()}};
    // Published experiment accuracies, kept for side-by-side reading only;
    // the synthetic channel is not expected to reproduce them.
    j["reference_paper_metrics"] = {
        {"binding", false},
        {"with_ris", {{"per_count", {{"1", 0.9988}, {"2", 0.9933}, {"3", 0.95}}},
                      {"average", 0.9807}}},
        {"without_ris", {{"per_count", {{"1", 0.9075}, {"2", 0.2967}, {"3", 0.7538}}},
                         {"average", 0.6526}}}};
    return j.dump(2);
}

std::string EvalReport::cdf_csv() const {
    std::ostringstream out;
    out << "error_m,fraction\n";
    for (const auto& [v, f] : cdf_points) out << v << "," << f << "\n";
    return out.str();
}

std::string EvalReport::confusion_csv() const {
    std::ostringstream out;
    out << "true_case";
    for (int c = 0; c < confusion.case_count(); ++c) out << ",pred_" << c;
    out << ",other\n";
    for (int r = 0; r < confusion.case_count(); ++r) {
        out << r;
        for (int v : confusion.counts[r]) out << "," << v;
        out << "\n";
    }
    return out.str();
}

ComparisonSummary compare(const EvalReport& with_ris, const EvalReport& without_ris) {
    ComparisonSummary s;
    s.with_counting = with_ris.counting.overall;
    s.without_counting = without_ris.counting.overall;
    s.with_median_error = with_ris.median_error_m;
    s.without_median_error = without_ris.median_error_m;
    s.with_dominates_counting = s.with_counting > s.without_counting;
    s.with_dominates_median =
        std::isnan(s.without_median_error) || s.with_median_error <= s.without_median_error;
    return s;
}

std::string ComparisonSummary::to_json_string() const {
    json j = {{"with_ris", {{"counting_overall", with_counting}, {"median_error_m", with_median_error}}},
              {"without_ris",
               {{"counting_overall", without_counting}, {"median_error_m", without_median_error}}},
              {"delta_counting", with_counting - without_counting},
              {"with_dominates_counting", with_dominates_counting},
              {"with_dominates_median", with_dominates_median}};
    return j.dump(2);
}

std::string ComparisonSummary::table() const {
    std::ostringstream out;
    auto row = [&](const std::string& name, double a, double b) {
        out << name;
        for (size_t i = name.size(); i < 26; ++i) out << ' ';
        std::ostringstream av, bv;
        av.precision(4);
        bv.precision(4);
        av << a;
        bv << b;
        out << av.str();
        for (size_t i = av.str().size(); i < 12; ++i) out << ' ';
        out << bv.str() << "\n";
    };
    out << "metric                    with-RIS    without-RIS\n";
    row("counting accuracy", with_counting, without_counting);
    row("median error (m)", with_median_error, without_median_error);
    return out.str();
}

}  // namespace wiris
