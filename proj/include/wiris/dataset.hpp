#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wiris/channel.hpp"
#include "wiris/scene.hpp"
#include "wiris/vocab.hpp"

namespace wiris {

/// One multi-person placement: occupied reference-point indices, sorted.
struct PlacementCase {
    int case_id = 0;
    std::vector<int> occupied;

    bool operator==(const PlacementCase&) const = default;
};

/// All subsets of {0..S-1} of size 1..I in lexicographic order.
/// Count = sum_i C(S, i).
std::vector<PlacementCase> enumerate_cases(int s, int i);

/// SOS, (x, y) token pairs sorted lexicographically by (x, y) meters, EOS.
TokenSequence label_sequence(const PlacementCase& c, const Scene& scene, const TokenVocab& vocab);

enum class Split : uint8_t { none = 0, train = 1, val = 2, test = 3 };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SplitCounts {
    int train = 0;
    int val = 0;
    int test = 0;

    int total() const { return train + val + test; }
};

enum class SplitMode { repetition, held_out_case };

/// The C x R fingerprint database: every CsiSample for every
/// (case, beam, repetition) plus canonical labels and split assignment.
/// Records are stored in (case, beam, repetition) order.
struct FingerprintDatabase {
    Scene scene;
    RadioConfig radio;
    Codebook codebook;
    std::vector<PlacementCase> cases;
    std::vector<TokenSequence> labels;  // indexed by case_id
    std::vector<CsiSample> records;
    std::vector<Split> split_assignment;  // indexed by case_id * samples_per_case + rep
    int samples_per_case = 0;
    uint64_t master_seed = 0;
    SplitCounts split_counts;
    SplitMode split_mode = SplitMode::repetition;
    uint64_t split_seed = 0;
    bool with_ris = true;

    int case_count() const { return static_cast<int>(cases.size()); }
    int beam_count() const { return static_cast<int>(codebook.beams.size()); }

    const CsiSample& record_at(int case_id, int beam, int rep) const;
    Split split_of(int case_id, int rep) const;

    /// Repetition indices of one case assigned to a split, ascending.
    std::vector<int> reps_in_split(int case_id, Split s) const;

    void save(const std::string& dir) const;
    static FingerprintDatabase load(const std::string& dir);

    bool operator==(const FingerprintDatabase& o) const;
};

/// Simulates every case x beam x repetition. Noise seeds derive from
/// hash(master_seed, case_id, beam, repetition), so any subset of the work
/// reproduces identically.
FingerprintDatabase build_database(const Scene& scene, const RadioConfig& radio,
                                   const Codebook& codebook,
                                   const std::vector<PlacementCase>& cases, int samples_per_case,
                                   uint64_t master_seed);

/// Assigns repetitions of every case to train/val/test. In repetition mode
/// every case contributes exactly the requested counts to each split. The
/// held_out_case option instead sends whole cases to one split, with counts
/// treated as ratios over cases.
void split_database(FingerprintDatabase& db, const SplitCounts& counts, uint64_t seed,
                    SplitMode mode = SplitMode::repetition);

/// FNV-1a 64 over a byte string, hex-encoded. Used for artifact manifests.
std::string content_hash(const std::string& bytes);

}  // namespace wiris
