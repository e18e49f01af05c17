#pragma once
// Sparse vectors, lazily applied linear maps, and windowed operator matrices.
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qlink/index.hpp"
#include "qlink/numeric.hpp"

namespace qlink {

class SparseVector {
public:
    using Map = std::unordered_map<BasisIndex, cplx, BasisIndexHash>;

    double tail_bound = 0.0;  // l2 mass known to lie outside the stored support

    void add(const BasisIndex& b, cplx c) {
        if (c == cplx(0.0, 0.0)) return;
        auto [it, fresh] = m_.try_emplace(b, c);
        if (!fresh) it->second += c;
    }
    void set(const BasisIndex& b, cplx c) {
        if (c == cplx(0.0, 0.0))
            m_.erase(b);
        else
            m_[b] = c;
    }
    cplx at(const BasisIndex& b) const {
        auto it = m_.find(b);
        return it == m_.end() ? cplx(0.0, 0.0) : it->second;
    }
    std::size_t size() const { return m_.size(); }
    bool empty() const { return m_.empty(); }
    const Map& entries() const { return m_; }
    auto begin() const { return m_.begin(); }
    auto end() const { return m_.end(); }

    // Drops exact zeros (left by cancellation) and, optionally, entries below rel*max.
    void prune(double rel = 0.0) {
        double mx = max_abs();
        double thr = rel * mx;
        for (auto it = m_.begin(); it != m_.end();) {
            double a = std::abs(it->second);
            if (a == 0.0 || a < thr) {
                tail_bound = std::sqrt(tail_bound * tail_bound + a * a);
                it = m_.erase(it);
            } else {
                ++it;
            }
        }
    }
    double max_abs() const {
        double mx = 0.0;
        for (const auto& [k, v] : m_) mx = std::max(mx, std::abs(v));
        return mx;
    }
    double norm2() const {
        // sorted accumulation keeps the result independent of hash order
        std::vector<double> a;
        a.reserve(m_.size());
        for (const auto& [k, v] : m_) a.push_back(std::norm(v));
        std::sort(a.begin(), a.end());
        double s = 0.0;
        for (double x : a) s += x;
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }

    std::vector<std::pair<BasisIndex, cplx>> sorted() const {
        std::vector<std::pair<BasisIndex, cplx>> v(m_.begin(), m_.end());
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return v;
    }

    SparseVector& operator*=(cplx c) {
        for (auto& [k, v] : m_) v *= c;
        tail_bound *= std::abs(c);
        return *this;
    }
    SparseVector& axpy(cplx c, const SparseVector& o) {
        for (const auto& [k, v] : o.m_) add(k, c * v);
        tail_bound = std::hypot(tail_bound, std::abs(c) * o.tail_bound);
        return *this;
    }

private:
    Map m_;
};

// <a, b>, antilinear in a.
inline cplx inner(const SparseVector& a, const SparseVector& b) {
    const SparseVector& small = a.size() <= b.size() ? a : b;
    const SparseVector& big = a.size() <= b.size() ? b : a;
    std::vector<std::pair<BasisIndex, cplx>> prods;
    for (const auto& [k, v] : small) {
        cplx w = big.at(k);
        if (w == cplx(0.0, 0.0)) continue;
        prods.emplace_back(k, &small == &a ? std::conj(v) * w : std::conj(w) * v);
    }
    std::sort(prods.begin(), prods.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    cplx s(0.0, 0.0);
    for (const auto& p : prods) s += p.second;
    return s;
}

// max |a_i - b_i| over the union of supports, optionally restricted by a predicate.
inline double max_diff(const SparseVector& a, const SparseVector& b,
                       const std::function<bool(const BasisIndex&)>& keep = nullptr) {
    double mx = 0.0;
    for (const auto& [k, v] : a)
        if (!keep || keep(k)) mx = std::max(mx, std::abs(v - b.at(k)));
    for (const auto& [k, v] : b)
        if ((!keep || keep(k)) && a.entries().find(k) == a.entries().end()) mx = std::max(mx, std::abs(v));
    return mx;
}

inline SparseVector basis_vector(const BasisIndex& b) {
    SparseVector v;
    v.add(b, cplx(1.0, 0.0));
    return v;
}

// A linear map known through its action on basis vectors: fn(in, c, out) adds
// c * (map e_in) into out. Maps are exact up to the coefficient drop policy of the
// function that built them.
struct LinOp {
    int arity_in = 0;
    int arity_out = 0;
    std::function<void(const BasisIndex&, cplx, SparseVector&)> fn;

    SparseVector operator()(const SparseVector& x) const {
        SparseVector out;
        for (const auto& [k, c] : x.sorted()) fn(k, c, out);
        out.prune();
        out.tail_bound = std::hypot(out.tail_bound, x.tail_bound);
        return out;
    }
    SparseVector operator()(const BasisIndex& b) const { return (*this)(basis_vector(b)); }
};

// a ∘ b
inline LinOp compose(const LinOp& a, const LinOp& b) {
    return LinOp{b.arity_in, a.arity_out, [a, b](const BasisIndex& in, cplx c, SparseVector& out) {
                     SparseVector mid;
                     b.fn(in, c, mid);
                     for (const auto& [k, v] : mid.sorted()) a.fn(k, v, out);
                 }};
}

inline LinOp compose(std::initializer_list<LinOp> chain) {
    // chain = {A, B, C} means A ∘ B ∘ C
    std::vector<LinOp> v(chain);
    LinOp r = v.back();
    for (int i = static_cast<int>(v.size()) - 2; i >= 0; --i) r = compose(v[i], r);
    return r;
}

inline LinOp sum(const LinOp& a, const LinOp& b, cplx ca = 1.0, cplx cb = 1.0) {
    return LinOp{a.arity_in, a.arity_out, [a, b, ca, cb](const BasisIndex& in, cplx c, SparseVector& out) {
                     a.fn(in, c * ca, out);
                     b.fn(in, c * cb, out);
                 }};
}

inline LinOp scaled(const LinOp& a, cplx s) {
    return LinOp{a.arity_in, a.arity_out, [a, s](const BasisIndex& in, cplx c, SparseVector& out) { a.fn(in, c * s, out); }};
}

inline LinOp identity_op(int arity) {
    return LinOp{arity, arity, [](const BasisIndex& in, cplx c, SparseVector& out) { out.add(in, c); }};
}

// Lift op to act on legs [first, first + op.arity_in) of a `total`-leg index.
inline LinOp on_legs(const LinOp& op, int first, int total) {
    return LinOp{total, total - op.arity_in + op.arity_out, [op, first](const BasisIndex& in, cplx c, SparseVector& out) {
                     SparseVector part;
                     op.fn(in.slice(first, op.arity_in), c, part);
                     for (const auto& [k, v] : part) out.add(in.splice(first, op.arity_in, k), v);
                 }};
}

// Lift op acting on two separate groups of legs: legs [f1, f1+n1) and [f2, f2+n2)
// (f1 + n1 <= f2) are fed to op as one concatenated index; op must preserve both
// group sizes.
inline LinOp on_leg_pair(const LinOp& op, int f1, int n1, int f2, int n2, int total) {
    return LinOp{total, total, [op, f1, n1, f2, n2](const BasisIndex& in, cplx c, SparseVector& out) {
                     BasisIndex sub = in.slice(f1, n1).concat(in.slice(f2, n2));
                     SparseVector part;
                     op.fn(sub, c, part);
                     for (const auto& [k, v] : part) {
                         BasisIndex r = in.splice(f2, n2, k.slice(n1, n2));
                         r = r.splice(f1, n1, k.slice(0, n1));
                         out.add(r, v);
                     }
                 }};
}

inline LinOp tensor(const LinOp& a, const LinOp& b) {
    return LinOp{a.arity_in + b.arity_in, a.arity_out + b.arity_out,
                 [a, b](const BasisIndex& in, cplx c, SparseVector& out) {
                     SparseVector pa, pb;
                     a.fn(in.slice(0, a.arity_in), c, pa);
                     b.fn(in.slice(a.arity_in, b.arity_in), 1.0, pb);
                     for (const auto& [ka, va] : pa)
                         for (const auto& [kb, vb] : pb) out.add(ka.concat(kb), va * vb);
                 }};
}

// Finite matrix over product bases, stored by columns.
class TruncatedOperator {
public:
    TruncatedOperator() = default;
    TruncatedOperator(Signature domain, Signature codomain) : dom_(std::move(domain)), cod_(std::move(codomain)) {}

    // Materialize op on the window: columns are the window basis of the domain,
    // rows outside the codomain window are dropped.
    static TruncatedOperator from_linop(const LinOp& op, const Signature& domain, const Signature& codomain,
                                        const Window& w) {
        TruncatedOperator t(domain, codomain);
        for (const auto& col : window_basis(domain, w)) {
            SparseVector v = op(col);
            SparseVector kept;
            for (const auto& [row, c] : v)
                if (in_window(row, codomain, w)) kept.add(row, c);
            if (!kept.empty()) t.cols_[col] = std::move(kept);
        }
        return t;
    }

    const Signature& domain() const { return dom_; }
    const Signature& codomain() const { return cod_; }
    const std::map<BasisIndex, SparseVector>& columns() const { return cols_; }

    void set(const BasisIndex& row, const BasisIndex& col, cplx v) { cols_[col].set(row, v); }
    cplx at(const BasisIndex& row, const BasisIndex& col) const {
        auto it = cols_.find(col);
        return it == cols_.end() ? cplx(0.0, 0.0) : it->second.at(row);
    }
    SparseVector column(const BasisIndex& col) const {
        auto it = cols_.find(col);
        return it == cols_.end() ? SparseVector{} : it->second;
    }
    std::size_t nnz() const {
        std::size_t n = 0;
        for (const auto& [k, v] : cols_) n += v.size();
        return n;
    }

    // this * o
    TruncatedOperator mul(const TruncatedOperator& o) const {
        if (dom_ != o.cod_) throw Error(ErrorCode::SignatureMismatch, "product of operators with incompatible legs");
        TruncatedOperator r(o.dom_, cod_);
        for (const auto& [col, v] : o.cols_) {
            SparseVector acc;
            for (const auto& [mid, c] : v.sorted()) {
                auto it = cols_.find(mid);
                if (it != cols_.end()) acc.axpy(c, it->second);
            }
            acc.prune();
            if (!acc.empty()) r.cols_[col] = std::move(acc);
        }
        return r;
    }
    TruncatedOperator add(const TruncatedOperator& o, cplx scale = 1.0) const {
        if (dom_ != o.dom_ || cod_ != o.cod_) throw Error(ErrorCode::SignatureMismatch, "sum of operators with incompatible legs");
        TruncatedOperator r = *this;
        for (const auto& [col, v] : o.cols_) r.cols_[col].axpy(scale, v);
        for (auto it = r.cols_.begin(); it != r.cols_.end();) {
            it->second.prune();
            it = it->second.empty() ? r.cols_.erase(it) : std::next(it);
        }
        return r;
    }
    TruncatedOperator scaled(cplx c) const {
        TruncatedOperator r = *this;
        for (auto& [col, v] : r.cols_) v *= c;
        return r;
    }
    TruncatedOperator adjoint() const {
        TruncatedOperator r(cod_, dom_);
        for (const auto& [col, v] : cols_)
            for (const auto& [row, c] : v) r.cols_[row].add(col, std::conj(c));
        return r;
    }
    TruncatedOperator tensor(const TruncatedOperator& o) const {
        Signature d = dom_, c = cod_;
        d.insert(d.end(), o.dom_.begin(), o.dom_.end());
        c.insert(c.end(), o.cod_.begin(), o.cod_.end());
        TruncatedOperator r(d, c);
        for (const auto& [ca, va] : cols_)
            for (const auto& [cb, vb] : o.cols_) {
                SparseVector col;
                for (const auto& [ra, xa] : va)
                    for (const auto& [rb, xb] : vb) col.add(ra.concat(rb), xa * xb);
                r.cols_[ca.concat(cb)] = std::move(col);
            }
        return r;
    }

    static TruncatedOperator identity(const Signature& sig, const Window& w) {
        TruncatedOperator r(sig, sig);
        for (const auto& b : window_basis(sig, w)) r.cols_[b].add(b, 1.0);
        return r;
    }

    // Largest singular value of the restriction to the given columns (all rows kept).
    double restriction_norm(const std::vector<BasisIndex>& cols) const {
        std::map<BasisIndex, int> rows;
        for (const auto& c : cols) {
            auto it = cols_.find(c);
            if (it == cols_.end()) continue;
            for (const auto& [r, v] : it->second) rows.emplace(r, 0);
        }
        if (rows.empty() || cols.empty()) return 0.0;
        int i = 0;
        for (auto& [r, idx] : rows) idx = i++;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                    static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) {
            auto it = cols_.find(cols[j]);
            if (it == cols_.end()) continue;
            for (const auto& [r, v] : it->second) m(rows[r], static_cast<Eigen::Index>(j)) = v;
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    double restriction_norm_interior(const Window& w) const {
        std::vector<BasisIndex> cols;
        for (const auto& [c, v] : cols_)
            if (is_interior(c, dom_, w)) cols.push_back(c);
        return restriction_norm(cols);
    }

    // One line per entry: row TAB col TAB re TAB im, sorted by (row, col).
    // Signed zeros are printed as 0 so that conjugation does not change the text.
    void dump(std::ostream& os) const {
        std::vector<std::tuple<BasisIndex, BasisIndex, cplx>> e;
        for (const auto& [col, v] : cols_)
            for (const auto& [row, c] : v) e.emplace_back(row, col, c);
        std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
            if (!(std::get<0>(a) == std::get<0>(b))) return std::get<0>(a) < std::get<0>(b);
            return std::get<1>(a) < std::get<1>(b);
        });
        for (const auto& [row, col, c] : e) {
            os << row.str() << '\t' << col.str() << '\t' << std::setprecision(17) << c.real() + 0.0 << '\t' << c.imag() + 0.0
               << '\n';
        }
    }
    std::string dump() const {
        std::ostringstream os;
        dump(os);
        return os.str();
    }

private:
    Signature dom_, cod_;
    std::map<BasisIndex, SparseVector> cols_;
};

inline LinOp as_linop(const TruncatedOperator& t) {
    auto cols = std::make_shared<std::map<BasisIndex, SparseVector>>(t.columns());
    int ai = static_cast<int>(t.domain().size()), ao = static_cast<int>(t.codomain().size());
    return LinOp{ai, ao, [cols](const BasisIndex& in, cplx c, SparseVector& out) {
                     auto it = cols->find(in);
                     if (it != cols->end()) out.axpy(c, it->second);
                 }};
}

}  // namespace qlink
