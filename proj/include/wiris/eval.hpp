#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wiris/dataset.hpp"
#include "wiris/vocab.hpp"

namespace wiris {

struct CountingAccuracy {
    double overall = 0.0;
    std::map<int, double> per_count;       // true count -> accuracy
    std::map<int, int> per_count_totals;   // true count -> sample count
    int total = 0;
    int correct = 0;
};

/// Predicted count = token body length / 2; malformed decodes never match.
CountingAccuracy counting_accuracy(const std::vector<TokenSequence>& predictions,
                                   const std::vector<TokenSequence>& labels,
                                   const TokenVocab& vocab);

/// Minimum-total-distance assignment between equally sized point sets,
/// exhaustive over permutations. Returns the matched per-point distances.
std::vector<double> matched_distances(const std::vector<Vec2>& predicted,
                                      const std::vector<Vec2>& truth);

/// Per-person distances over samples whose predicted count is correct,
/// with prediction-to-truth pairing by optimal assignment.
std::vector<double> localization_errors(const std::vector<TokenSequence>& predictions,
                                        const std::vector<TokenSequence>& labels,
                                        const TokenVocab& vocab);

/// Empirical CDF: sorted (value, cumulative fraction) pairs, duplicates
/// collapsed; last fraction is 1.
std::vector<std::pair<double, double>> cdf(std::vector<double> errors);

struct ConfusionMatrix {
    /// rows: true case; cols: predicted case plus a trailing "other" column
    /// for decodes that match no case exactly.
    std::vector<std::vector<int>> counts;

    int case_count() const { return static_cast<int>(counts.size()); }
    long trace() const;
    long total() const;
};

/// Maps each decoded prediction to a case by exact occupied-set match.
ConfusionMatrix confusion_matrix(const std::vector<TokenSequence>& predictions,
                                 const std::vector<int>& label_case_ids,
                                 const std::vector<PlacementCase>& cases, const Scene& scene,
                                 const TokenVocab& vocab);

struct EvalReport {
    bool with_ris = true;
    std::string profile;
    uint64_t seed = 0;
    CountingAccuracy counting;
    std::vector<double> error_samples;
    std::vector<std::pair<double, double>> cdf_points;
    ConfusionMatrix confusion;
    double median_error_m = 0.0;
    double mean_error_m = 0.0;

    std::string to_json_string() const;
    std::string cdf_csv() const;
    std::string confusion_csv() const;
};

/// Full metric computation for one test run.
EvalReport evaluate_predictions(const std::vector<TokenSequence>& predictions,
                                const std::vector<int>& label_case_ids,
                                const std::vector<PlacementCase>& cases, const Scene& scene,
                                const TokenVocab& vocab);

struct ComparisonSummary {
    double with_counting = 0.0;
    double without_counting = 0.0;
    double with_median_error = 0.0;
    double without_median_error = 0.0;
    bool with_dominates_counting = false;
    bool with_dominates_median = false;

    std::string to_json_string() const;
    std::string table() const;
};

ComparisonSummary compare(const EvalReport& with_ris, const EvalReport& without_ris);

double median(std::vector<double> values);

}  // namespace wiris
