#pragma once
// Product-basis labels. A leg carries an integer value and a sign label; the
// sign only matters for the split index sets I_- = Z ⊔ N0^- and J = Z ⊔ N.
#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "qlink/context.hpp"
#include "qlink/error.hpp"

namespace qlink {

enum class LegKind : std::uint8_t {
    N,   // I_+ = {0,1,2,...}
    Z,   // I_0 and every l^2(Z) leg
    Im,  // I_-: (+) any integer, (-) negative integers
    J,   // J: (+) any integer, (-) non-negative integers
};

inline const char* to_string(LegKind k) {
    switch (k) {
        case LegKind::N: return "N";
        case LegKind::Z: return "Z";
        case LegKind::Im: return "I-";
        case LegKind::J: return "J";
    }
    return "?";
}

struct SignedIndex {
    int value = 0;
    int sign = 1;  // +1 or -1; the character c of the index
    friend bool operator==(const SignedIndex&, const SignedIndex&) = default;
};

inline bool in_Iminus(const SignedIndex& x) { return x.sign > 0 || x.value < 0; }
inline bool in_J(const SignedIndex& x) { return x.sign > 0 || x.value >= 0; }

struct Leg {
    std::int32_t v = 0;
    std::int8_t s = 1;
    friend bool operator==(const Leg&, const Leg&) = default;
    friend bool operator<(const Leg& a, const Leg& b) { return a.v != b.v ? a.v < b.v : a.s < b.s; }
};

using Signature = std::vector<LegKind>;

inline bool leg_valid(const Leg& l, LegKind k) {
    switch (k) {
        case LegKind::N: return l.s == 1 && l.v >= 0;
        case LegKind::Z: return l.s == 1;
        case LegKind::Im: return l.s == 1 || (l.s == -1 && l.v < 0);
        case LegKind::J: return l.s == 1 || (l.s == -1 && l.v >= 0);
    }
    return false;
}

class BasisIndex {
public:
    static constexpr int kMax = 8;

    BasisIndex() = default;
    BasisIndex(std::initializer_list<Leg> legs) {
        for (const auto& l : legs) push(l);
    }
    static BasisIndex plain(std::initializer_list<int> vals) {
        BasisIndex b;
        for (int v : vals) b.push(Leg{v, 1});
        return b;
    }

    void push(Leg l) {
        if (n_ >= kMax) throw Error(ErrorCode::InvalidIndex, "too many legs");
        legs_[n_++] = l;
    }
    int size() const { return n_; }
    const Leg& operator[](int i) const { return legs_[i]; }
    Leg& operator[](int i) { return legs_[i]; }

    BasisIndex slice(int first, int count) const {
        BasisIndex b;
        for (int i = 0; i < count; ++i) b.push(legs_[first + i]);
        return b;
    }
    // replace legs [first, first+count) by the legs of r
    BasisIndex splice(int first, int count, const BasisIndex& r) const {
        BasisIndex b;
        for (int i = 0; i < first; ++i) b.push(legs_[i]);
        for (int i = 0; i < r.size(); ++i) b.push(r[i]);
        for (int i = first + count; i < n_; ++i) b.push(legs_[i]);
        return b;
    }
    BasisIndex concat(const BasisIndex& r) const { return splice(n_, 0, r); }

    friend bool operator==(const BasisIndex& a, const BasisIndex& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (!(a.legs_[i] == b.legs_[i])) return false;
        return true;
    }
    friend bool operator<(const BasisIndex& a, const BasisIndex& b) {
        int m = a.n_ < b.n_ ? a.n_ : b.n_;
        for (int i = 0; i < m; ++i) {
            if (a.legs_[i] < b.legs_[i]) return true;
            if (b.legs_[i] < a.legs_[i]) return false;
        }
        return a.n_ < b.n_;
    }

    std::size_t hash() const {
        std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(n_);
        for (int i = 0; i < n_; ++i) {
            std::uint64_t x = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(legs_[i].v)) << 1) |
                              (legs_[i].s < 0 ? 1u : 0u);
            h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }

    std::string str() const {
        std::string out = "(";
        for (int i = 0; i < n_; ++i) {
            if (i) out += ",";
            out += std::to_string(legs_[i].v);
            if (legs_[i].s < 0) out += "m";
        }
        return out + ")";
    }

    void validate(const Signature& sig) const {
        if (static_cast<int>(sig.size()) != n_)
            throw Error(ErrorCode::SignatureMismatch, "index " + str() + " has wrong leg count");
        for (int i = 0; i < n_; ++i)
            if (!leg_valid(legs_[i], sig[i]))
                throw Error(ErrorCode::InvalidIndex,
                            "leg " + std::to_string(i) + " of " + str() + " is not in " + to_string(sig[i]));
    }

private:
    std::array<Leg, kMax> legs_{};
    int n_ = 0;
};

struct BasisIndexHash {
    std::size_t operator()(const BasisIndex& b) const { return b.hash(); }
};

// Window membership per leg kind. Signed kinds use the Z range for the (+) part;
// the (-) part of I_- runs over [z_lo, -1] and that of J over [0, n_cut].
inline bool leg_in_window(const Leg& l, LegKind k, const Window& w) {
    switch (k) {
        case LegKind::N: return l.v >= 0 && l.v <= w.n_cut;
        case LegKind::Z: return l.v >= w.z_lo && l.v <= w.z_hi;
        case LegKind::Im: return l.s > 0 ? (l.v >= w.z_lo && l.v <= w.z_hi) : (l.v >= w.z_lo && l.v < 0);
        case LegKind::J: return l.s > 0 ? (l.v >= w.z_lo && l.v <= w.z_hi) : (l.v >= 0 && l.v <= w.n_cut);
    }
    return false;
}

// Interior: every truncation edge at least interior_margin away. The lower edge of
// an N leg is a genuine boundary of the index set, not a truncation edge.
inline bool leg_interior(const Leg& l, LegKind k, const Window& w) {
    const int m = w.interior_margin;
    switch (k) {
        case LegKind::N: return l.v >= 0 && l.v + m <= w.n_cut;
        case LegKind::Z: return l.v - m >= w.z_lo && l.v + m <= w.z_hi;
        case LegKind::Im: return l.s > 0 ? (l.v - m >= w.z_lo && l.v + m <= w.z_hi) : (l.v - m >= w.z_lo && l.v < 0);
        case LegKind::J: return l.s > 0 ? (l.v - m >= w.z_lo && l.v + m <= w.z_hi) : (l.v >= 0 && l.v + m <= w.n_cut);
    }
    return false;
}

inline bool in_window(const BasisIndex& b, const Signature& sig, const Window& w) {
    if (static_cast<int>(sig.size()) != b.size()) return false;
    for (int i = 0; i < b.size(); ++i)
        if (!leg_valid(b[i], sig[i]) || !leg_in_window(b[i], sig[i], w)) return false;
    return true;
}

inline bool is_interior(const BasisIndex& b, const Signature& sig, const Window& w) {
    if (static_cast<int>(sig.size()) != b.size()) return false;
    for (int i = 0; i < b.size(); ++i)
        if (!leg_valid(b[i], sig[i]) || !leg_interior(b[i], sig[i], w)) return false;
    return true;
}

inline std::vector<Leg> legs_of(LegKind k, const Window& w, bool interior_only) {
    std::vector<Leg> out;
    for (int v = std::min(w.z_lo, 0); v <= std::max(w.z_hi, w.n_cut); ++v)
        for (std::int8_t s : {std::int8_t(1), std::int8_t(-1)}) {
            Leg l{v, s};
            if (!leg_valid(l, k)) continue;
            if (interior_only ? leg_interior(l, k, w) : leg_in_window(l, k, w)) out.push_back(l);
        }
    return out;
}

// All basis indices of the window (or its interior), lexicographically ordered.
inline std::vector<BasisIndex> window_basis(const Signature& sig, const Window& w, bool interior_only = false) {
    std::vector<BasisIndex> out{BasisIndex{}};
    for (LegKind k : sig) {
        auto legs = legs_of(k, w, interior_only);
        std::vector<BasisIndex> next;
        next.reserve(out.size() * legs.size());
        for (const auto& b : out)
            for (const auto& l : legs) {
                BasisIndex c = b;
                c.push(l);
                next.push_back(c);
            }
        out.swap(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace qlink
