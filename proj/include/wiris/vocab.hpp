#pragma once

#include <string>
#include <vector>

#include "wiris/geometry.hpp"

namespace wiris {

/// SOS <x> <y> ... EOS label/prediction sequence (token ids).
struct TokenSequence {
    std::vector<int> ids;

    bool operator==(const TokenSequence&) const = default;
};

/// Token inventory: PAD, SOS, EOS plus one token per distinct reference-grid
/// x coordinate and per distinct y coordinate. Ids are dense from 0;
/// coordinate tokens carry their value in meters exactly.
class TokenVocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kSos = 1;
    static constexpr int kEos = 2;

    enum class Kind { pad, sos, eos, coord_x, coord_y };

    TokenVocab() = default;
    explicit TokenVocab(const std::vector<Vec2>& reference_points);

    /// Rebuild from sorted distinct coordinate lists (checkpoint loading).
    static TokenVocab from_values(std::vector<double> xs, std::vector<double> ys);

    int size() const { return 3 + static_cast<int>(xs_.size() + ys_.size()); }

    int id_for_x(double meters) const;
    int id_for_y(double meters) const;

    Kind kind(int id) const;
    /// Meters for a coordinate token; throws for specials.
    double meters(int id) const;

    std::string name(int id) const;

    const std::vector<double>& x_values() const { return xs_; }
    const std::vector<double>& y_values() const { return ys_; }

    bool operator==(const TokenVocab&) const = default;

private:
    std::vector<double> xs_;  // sorted distinct x coordinates
    std::vector<double> ys_;  // sorted distinct y coordinates
};

/// True when seq is SOS, (x, y) token pairs, EOS, with no stray tokens.
bool is_well_formed(const TokenSequence& seq, const TokenVocab& vocab);

/// Number of (x, y) pairs; -1 when the sequence is malformed.
int person_count(const TokenSequence& seq, const TokenVocab& vocab);

/// Decodes the coordinate body to meters. Requires a well-formed sequence.
std::vector<Vec2> decode_positions(const TokenSequence& seq, const TokenVocab& vocab);

}  // namespace wiris
