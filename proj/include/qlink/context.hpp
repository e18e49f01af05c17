#pragma once
#include <cmath>
#include <string>

#include "qlink/error.hpp"

namespace qlink {

// Deformation parameter plus series cut-off policy. Immutable once built.
class QContext {
public:
    explicit QContext(double q, double eps_term = 1e-16, int max_terms = 512)
        : q_(q), eps_term_(eps_term), max_terms_(max_terms) {
        if (!(q > 0.0 && q < 1.0))
            throw Error(ErrorCode::InvalidBase, "q must lie in (0,1), got " + std::to_string(q));
        if (!(eps_term > 0.0 && eps_term < 1e-6))
            throw Error(ErrorCode::InvalidContext, "eps_term must lie in (0,1e-6)");
        if (max_terms < 64) throw Error(ErrorCode::InvalidContext, "max_terms must be >= 64");
    }
    double q() const { return q_; }
    double q2() const { return q_ * q_; }
    double eps_term() const { return eps_term_; }
    int max_terms() const { return max_terms_; }

private:
    double q_;
    double eps_term_;
    int max_terms_;
};

// Truncation window. N-type legs run over 0..n_cut, Z-type legs over [z_lo, z_hi].
struct Window {
    int n_cut = 24;
    int z_lo = -12;
    int z_hi = 12;
    int interior_margin = 8;

    void validate() const {
        if (n_cut < 0) throw Error(ErrorCode::WindowTooSmall, "n_cut must be non-negative");
        if (z_lo >= z_hi) throw Error(ErrorCode::WindowTooSmall, "z_lo must be below z_hi");
        if (interior_margin < 0) throw Error(ErrorCode::WindowTooSmall, "negative interior margin");
    }
    bool n_interior(int n) const { return n >= 0 && n + interior_margin <= n_cut; }
    bool z_interior(int z) const { return z - interior_margin >= z_lo && z + interior_margin <= z_hi; }
};

}  // namespace qlink
