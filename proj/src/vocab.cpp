#include "wiris/vocab.hpp"

#include <algorithm>
#include <stdexcept>

namespace wiris {

TokenVocab TokenVocab::from_values(std::vector<double> xs, std::vector<double> ys) {
    TokenVocab v;
    v.xs_ = std::move(xs);
    v.ys_ = std::move(ys);
    return v;
}

TokenVocab::TokenVocab(const std::vector<Vec2>& reference_points) {
    for (const Vec2& p : reference_points) {
        xs_.push_back(p.x);
        ys_.push_back(p.y);
    }
    std::sort(xs_.begin(), xs_.end());
    xs_.erase(std::unique(xs_.begin(), xs_.end()), xs_.end());
    std::sort(ys_.begin(), ys_.end());
    ys_.erase(std::unique(ys_.begin(), ys_.end()), ys_.end());
}

int TokenVocab::id_for_x(double meters) const {
    auto it = std::find(xs_.begin(), xs_.end(), meters);
    if (it == xs_.end()) throw std::invalid_argument("x coordinate outside vocabulary");
    return 3 + static_cast<int>(it - xs_.begin());
}

int TokenVocab::id_for_y(double meters) const {
    auto it = std::find(ys_.begin(), ys_.end(), meters);
    if (it == ys_.end()) throw std::invalid_argument("y coordinate outside vocabulary");
    return 3 + static_cast<int>(xs_.size()) + static_cast<int>(it - ys_.begin());
}

TokenVocab::Kind TokenVocab::kind(int id) const {
    if (id == kPad) return Kind::pad;
    if (id == kSos) return Kind::sos;
    if (id == kEos) return Kind::eos;
    int i = id - 3;
    if (i >= 0 && i < static_cast<int>(xs_.size())) return Kind::coord_x;
    i -= static_cast<int>(xs_.size());
    if (i >= 0 && i < static_cast<int>(ys_.size())) return Kind::coord_y;
    throw std::invalid_argument("token id out of range");
}

double TokenVocab::meters(int id) const {
    Kind k = kind(id);
    if (k == Kind::coord_x) return xs_[id - 3];
    if (k == Kind::coord_y) return ys_[id - 3 - static_cast<int>(xs_.size())];
    throw std::invalid_argument("token has no coordinate value");
}

std::string TokenVocab::name(int id) const {
    switch (kind(id)) {
        case Kind::pad: return "PAD";
        case Kind::sos: return "SOS";
        case Kind::eos: return "EOS";
        case Kind::coord_x: return "x=" + std::to_string(meters(id));
        case Kind::coord_y: return "y=" + std::to_string(meters(id));
    }
    return "?";
}

bool is_well_formed(const TokenSequence& seq, const TokenVocab& vocab) {
    const auto& ids = seq.ids;
    if (ids.size() < 2) return false;
    if (ids.front() != TokenVocab::kSos || ids.back() != TokenVocab::kEos) return false;
    size_t body = ids.size() - 2;
    if (body % 2 != 0) return false;
    for (size_t i = 1; i + 1 < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= vocab.size()) return false;
        TokenVocab::Kind k = vocab.kind(ids[i]);
        bool expect_x = (i - 1) % 2 == 0;
        if (expect_x && k != TokenVocab::Kind::coord_x) return false;
        if (!expect_x && k != TokenVocab::Kind::coord_y) return false;
    }
    return true;
}

int person_count(const TokenSequence& seq, const TokenVocab& vocab) {
    if (!is_well_formed(seq, vocab)) return -1;
    return static_cast<int>((seq.ids.size() - 2) / 2);
}

std::vector<Vec2> decode_positions(const TokenSequence& seq, const TokenVocab& vocab) {
    if (!is_well_formed(seq, vocab)) throw std::invalid_argument("malformed token sequence");
    std::vector<Vec2> out;
    for (size_t i = 1; i + 2 < seq.ids.size(); i += 2)
        out.push_back({vocab.meters(seq.ids[i]), vocab.meters(seq.ids[i + 1])});
    return out;
}

}  // namespace wiris
