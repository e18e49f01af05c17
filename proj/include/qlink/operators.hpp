#pragma once
// Generators, coactions, Jacobi blocks, multiplicative unitaries, the implementing
// unitary G and the comultiplications Delta_{mu nu}(x) = W_mu^*(1 ⊗ x) W_nu.
//
// Everything is available as a lazy LinOp acting on basis vectors with untruncated
// legs; the TruncatedOperator builders materialize these on a Window.
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "qlink/coefficients.hpp"
#include "qlink/sparse.hpp"

namespace qlink {

struct CornerLabel {
    Family mu = Family::Plus;
    Family nu = Family::Plus;
};

inline Signature hilbert_signature(Family f) { return {index_kind(f), LegKind::Z}; }
inline Signature pair_signature(Family f) {
    auto s = hilbert_signature(f);
    return {s[0], s[1], s[0], s[1]};
}
// W_mu lands in l2(Z) ⊗ l2(Z) ⊗ H_mu
inline Signature w_range_signature(Family f) { return {LegKind::Z, LegKind::Z, index_kind(f), LegKind::Z}; }
inline Signature sphere_bundle_signature() { return {LegKind::N, LegKind::Z, LegKind::N}; }
inline Signature g_range_signature() { return {LegKind::Im, LegKind::Z, LegKind::N}; }

namespace ops {

inline Leg L(long v, int s = 1) { return Leg{static_cast<std::int32_t>(v), static_cast<std::int8_t>(s)}; }
inline double qp(double q, long e) { return std::pow(q, static_cast<double>(e)); }

// ---- SU_q(2) on l2(N) ⊗ l2(Z)
inline LinOp a_plus(const QContext& ctx) {
    double q = ctx.q();
    return {2, 2, [q](const BasisIndex& in, cplx c, SparseVector& out) {
                long n = in[0].v;
                if (n >= 1) out.add({L(n - 1), in[1]}, c * std::sqrt(1.0 - qp(q, 2 * n)));
            }};
}
inline LinOp a_plus_adj(const QContext& ctx) {
    double q = ctx.q();
    return {2, 2, [q](const BasisIndex& in, cplx c, SparseVector& out) {
                long n = in[0].v;
                out.add({L(n + 1), in[1]}, c * std::sqrt(1.0 - qp(q, 2 * n + 2)));
            }};
}
inline LinOp b_shift(const QContext& ctx, int dir) {
    double q = ctx.q();
    return {2, 2, [q, dir](const BasisIndex& in, cplx c, SparseVector& out) {
                out.add({in[0], L(in[1].v + dir)}, c * qp(q, in[0].v));
            }};
}
inline LinOp b_plus(const QContext& ctx) { return b_shift(ctx, 1); }
inline LinOp b_plus_adj(const QContext& ctx) { return b_shift(ctx, -1); }

// ---- E_q(2) on l2(Z) ⊗ l2(Z); b_0 is unbounded and only ever applied to basis vectors
inline LinOp a_zero() {
    return {2, 2, [](const BasisIndex& in, cplx c, SparseVector& out) { out.add({L(in[0].v - 1), in[1]}, c); }};
}
inline LinOp a_zero_adj() {
    return {2, 2, [](const BasisIndex& in, cplx c, SparseVector& out) { out.add({L(in[0].v + 1), in[1]}, c); }};
}
inline LinOp b_zero(const QContext& ctx) { return b_shift(ctx, 1); }
inline LinOp b_zero_adj(const QContext& ctx) { return b_shift(ctx, -1); }

// ---- equatorial sphere on l2(N), sign = ±1
inline LinOp sphere_Y(int sign, const QContext& ctx) {
    double q = ctx.q();
    return {1, 1, [q, sign](const BasisIndex& in, cplx c, SparseVector& out) {
                long k = in[0].v;
                if (k >= 1) out.add({L(k - 1)}, c * double(sign) * std::sqrt(1.0 - qp(q, 4 * k)));
            }};
}
inline LinOp sphere_Y_adj(int sign, const QContext& ctx) {
    double q = ctx.q();
    return {1, 1, [q, sign](const BasisIndex& in, cplx c, SparseVector& out) {
                long k = in[0].v;
                out.add({L(k + 1)}, c * double(sign) * std::sqrt(1.0 - qp(q, 4 * k + 4)));
            }};
}
inline LinOp sphere_W(int sign, const QContext& ctx) {
    double q = ctx.q();
    return {1, 1, [q, sign](const BasisIndex& in, cplx c, SparseVector& out) {
                out.add(in, c * double(sign) * qp(q, 2 * in[0].v));
            }};
}

enum class SphereGen { W, Y, Ystar };

// Coaction on l2(N) ⊗ l2(Z) ⊗ l2(N) assembled from the SU_q(2) generators on the
// first two legs and the (+) sphere generators on the last:
//   Y* -> (a*)^2 ⊗ Y* - q(1+q^2) a*b ⊗ W - q b^2 ⊗ Y
//   W  -> a*b* ⊗ Y* + (1 - (1+q^2) b*b) ⊗ W + ba ⊗ Y
//   Y  -> -q (b*)^2 ⊗ Y* - q(1+q^2) b*a ⊗ W + a^2 ⊗ Y
inline LinOp coaction(SphereGen x, const QContext& ctx) {
    const double q = ctx.q(), q2 = ctx.q2();
    LinOp a = a_plus(ctx), as = a_plus_adj(ctx), b = b_plus(ctx), bs = b_plus_adj(ctx);
    LinOp Y = sphere_Y(1, ctx), Ys = sphere_Y_adj(1, ctx), W = sphere_W(1, ctx);
    auto t = [](const LinOp& l, const LinOp& r) { return tensor(l, r); };
    switch (x) {
        case SphereGen::Ystar:
            return sum(sum(t(compose(as, as), Ys), t(compose(as, b), W), 1.0, -q * (1 + q2)), t(compose(b, b), Y), 1.0,
                       -q);
        case SphereGen::W:
            return sum(sum(t(compose(as, bs), Ys), t(sum(identity_op(2), compose(bs, b), 1.0, -(1 + q2)), W)),
                       t(compose(b, a), Y));
        case SphereGen::Y:
            return sum(sum(t(compose(bs, bs), Ys), t(compose(bs, a), W), -q, -q * (1 + q2)), t(compose(a, a), Y));
    }
    return identity_op(3);
}

// ---- linking operators
inline double lm0_factor(int sign, long n, const QContext& ctx) {
    // q^{n(n+1)/2} (∓q^{-2n};q^2)_inf^{1/2}, evaluated at 50 digits
    thread_local std::map<std::array<long long, 3>, double> cache;
    std::array<long long, 3> key{detail::qbits(ctx.q()), sign, n};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    detail::Lat<mp50> lat(ctx.q());
    mp50 v = lat.pw(n * (n + 1) / 2) * detail::csqrt(lat.poch(-sign, -2 * n, 2, -1));
    double d = num::to_d(v);
    cache.emplace(key, d);
    return d;
}

// L_{0+}: l2(N) ⊗ l2(Z) -> l2(Z) ⊗ l2(Z)
inline LinOp L0p(const QContext& ctx) {
    double q = ctx.q();
    return {2, 2, [q](const BasisIndex& in, cplx c, SparseVector& out) {
                double f = num::to_d(detail::Lat<double>(q).poch(1, 2 * in[0].v + 2, 2, -1));
                out.add(in, c * std::sqrt(f));
            }};
}
// L_{-0}^{(sign)}: l2(Z) ⊗ l2(Z) -> l2(I_-) ⊗ l2(Z)
inline LinOp Lm0(int sign, const QContext& ctx) {
    QContext cc = ctx;
    return {2, 2, [cc, sign](const BasisIndex& in, cplx c, SparseVector& out) {
                long n = in[0].v;
                if (sign < 0 && n >= 0) return;
                out.add({L(n, sign), in[1]}, c * lm0_factor(sign, n, cc));
            }};
}
// f: e_n^{(±)} ⊗ e_k -> (±1)^{n+1} e_n^{(±)} ⊗ e_k
inline LinOp f_op() {
    return {2, 2, [](const BasisIndex& in, cplx c, SparseVector& out) {
                out.add(in, c * double(num::sgnpow(in[0].s, in[0].v + 1)));
            }};
}
// e = P_+ - P_- on the label of an I_- leg (first leg of H_-)
inline LinOp e_op() {
    return {2, 2, [](const BasisIndex& in, cplx c, SparseVector& out) { out.add(in, c * double(in[0].s)); }};
}
inline LinOp sign_projection(int sign) {
    return {2, 2, [sign](const BasisIndex& in, cplx c, SparseVector& out) {
                if (in[0].s == sign) out.add(in, c);
            }};
}
// u: e_p^{(c)} ⊗ e_k -> f(c) e_p^{(c)} ⊗ e_k with f(+) = 1, f(-) = i
inline cplx u_phase(int sign) { return sign > 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0); }
inline LinOp u_op(bool adjoint = false) {
    return {2, 2, [adjoint](const BasisIndex& in, cplx c, SparseVector& out) {
                cplx f = u_phase(in[0].s);
                out.add(in, c * (adjoint ? std::conj(f) : f));
            }};
}
// Omega on H_- ⊗ H_-: the sign omega(c(v), c(w)), equal to -1 only for (-,-)
inline LinOp omega_op() {
    return {4, 4, [](const BasisIndex& in, cplx c, SparseVector& out) {
                out.add(in, (in[0].s < 0 && in[2].s < 0) ? -c : c);
            }};
}

// e_{ab} ⊗ S^k on H: e_n ⊗ e_m -> delta_{n b} e_a ⊗ e_{m+k}
inline LinOp matrix_unit(Leg a, Leg b, long k) {
    return {2, 2, [a, b, k](const BasisIndex& in, cplx c, SparseVector& out) {
                if (in[0] == b) out.add({a, L(in[1].v + k)}, c);
            }};
}

inline LinOp diag_op(int arity, std::function<cplx(const BasisIndex&)> f) {
    return {arity, arity, [f](const BasisIndex& in, cplx c, SparseVector& out) { out.add(in, c * f(in)); }};
}

// K_{r,s}(b*b) on l2(N) ⊗ l2(Z)
inline LinOp K_of_bb(long r, long s, int sign, const QContext& ctx) {
    QContext cc = ctx;
    return diag_op(2, [cc, r, s, sign](const BasisIndex& in) {
        return cplx(k_polynomial(r, s, sign, qp(cc.q(), 2 * in[0].v), cc), 0.0);
    });
}

// ---- multiplicative unitaries

struct RowTerm {
    Leg p;
    double coef;
};

// Entries P(p, v, w) of the row of W_mu at fixed (v, w), over the admissible p.
inline const std::vector<RowTerm>& w_row(Family fam, Leg v, Leg w, const QContext& ctx, const ScanPolicy& pol) {
    thread_local std::unordered_map<detail::Key, std::shared_ptr<std::vector<RowTerm>>, detail::KeyHash> cache;
    detail::Key key{detail::qbits(ctx.q()), static_cast<long long>(fam), v.v, v.s, w.v, w.s,
                    static_cast<long long>(std::llround(-std::log10(pol.drop) * 16)), 0};
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto out = std::make_shared<std::vector<RowTerm>>();
    const long kBig = detail::kBig;
    switch (fam) {
        case Family::Plus: {
            auto sr = scan_support([&](long p) { return p_plus_alt(p, v.v, w.v, ctx); }, 0, 0, kBig, pol);
            for (auto& [p, c] : sr.values)
                if (c != 0.0) out->push_back({L(p), c});
            break;
        }
        case Family::Zero: {
            auto sr = scan_support([&](long p) { return p_zero(p, v.v, w.v, ctx); }, w.v, -kBig, kBig, pol);
            for (auto& [p, c] : sr.values)
                if (c != 0.0) out->push_back({L(p), c});
            break;
        }
        case Family::Minus: {
            int ps = v.s * w.s;
            long hi = ps < 0 ? -1 : kBig;
            auto sr = scan_support(
                [&](long p) {
                    return p_minus(SignedIndex{static_cast<int>(p), ps}, SignedIndex{v.v, v.s}, SignedIndex{w.v, w.s}, ctx);
                },
                std::min<long>(w.v, hi), -kBig, hi, pol);
            for (auto& [p, c] : sr.values)
                if (c != 0.0) out->push_back({L(p, ps), c});
            break;
        }
    }
    return *cache.emplace(key, out).first->second;
}

// W_mu: e_v ⊗ e_a ⊗ e_w ⊗ e_b -> sum_p P(p,v,w) e_{a-p+w} ⊗ e_{b+p-v} ⊗ e_p ⊗ e_{v-w}
inline LinOp W(Family fam, const QContext& ctx, ScanPolicy pol = {}) {
    QContext cc = ctx;
    return {4, 4, [fam, cc, pol](const BasisIndex& in, cplx c, SparseVector& out) {
                const Leg v = in[0], w = in[2];
                const long a = in[1].v, b = in[3].v;
                for (const auto& t : w_row(fam, v, w, cc, pol))
                    out.add({L(a - t.p.v + w.v), L(b + t.p.v - v.v), t.p, L(v.v - w.v)}, c * t.coef);
            }};
}

// W_mu^*: e_r ⊗ e_s ⊗ e_p ⊗ e_t -> xi_{r,s,p,t}
inline LinOp W_adj(Family fam, const QContext& ctx, ScanPolicy pol = {}) {
    QContext cc = ctx;
    return {4, 4, [fam, cc, pol](const BasisIndex& in, cplx c, SparseVector& out) {
                const long r = in[0].v, s = in[1].v, t = in[3].v;
                const Leg p = in[2];
                const XiCoeffs& xc = xi_coeffs(fam, SignedIndex{p.v, p.s}, t, cc, pol);
                for (const auto& term : xc.terms) out.add(xi_target(term, r, s, p.v), c * term.coef);
            }};
}

// Delta_{mu nu}(x) = W_mu^* (1 ⊗ x) W_nu with x: H_nu -> H_mu given lazily
inline LinOp comult_op(const LinOp& x, CornerLabel corner, const QContext& ctx, ScanPolicy pol = {}) {
    return compose({W_adj(corner.mu, ctx, pol), on_legs(x, 2, 4), W(corner.nu, ctx, pol)});
}

// ---- implementing unitary G : l2(N) ⊗ l2(Z) ⊗ l2(N) -> l2(I_-) ⊗ l2(Z) ⊗ l2(N)

// G e_n ⊗ e_m ⊗ e_s = sum_{r, ±} g(±,r,s,n) e^{(±)}_{n-r-s-1} ⊗ e_{m-r+s} ⊗ e_r
inline LinOp G(const QContext& ctx, ScanPolicy pol = {}) {
    QContext cc = ctx;
    return {3, 3, [cc, pol](const BasisIndex& in, cplx c, SparseVector& out) {
                const long n = in[0].v, m = in[1].v, s = in[2].v;
                for (int sg : {1, -1}) {
                    auto sr = scan_support([&](long r) { return g_elem(sg, r, s, n, m, cc).coef; }, 0, 0, detail::kBig, pol);
                    for (const auto& [r, v] : sr.values)
                        if (v != 0.0) out.add({L(n - r - s - 1, sg), L(m - r + s), L(r)}, c * v);
                }
            }};
}

// G^*: e^{(±)}_M ⊗ e_l ⊗ e_r -> xi_{r,±}^{(t,p)}, p = -M-r-1, t = l+2r+M+1, with
// xi = sum_n Q(p_±, r, n) e_n ⊗ e_{t-n} ⊗ e_{p+n}
inline LinOp G_adj(const QContext& ctx, ScanPolicy pol = {}) {
    QContext cc = ctx;
    return {3, 3, [cc, pol](const BasisIndex& in, cplx c, SparseVector& out) {
                const long M = in[0].v, l = in[1].v, r = in[2].v;
                const int sg = in[0].s;
                const long p = -M - r - 1, t = l + 2 * r + M + 1;
                if (sg < 0 && p + r < 0) return;
                const long n0 = std::max(0L, -p);
                auto sr = scan_support([&](long n) { return q_coeff(SignedIndex{static_cast<int>(p), sg}, r, n, cc); }, n0,
                                       n0, detail::kBig, pol);
                for (const auto& [n, v] : sr.values)
                    if (v != 0.0) out.add({L(n), L(t - n), L(p + n)}, c * v);
            }};
}

// Block G^{(sign)}_{r,s}: e_n ⊗ e_k -> g(sign,r,s,n) e^{(sign)}_{n-r-s-1} ⊗ e_{k-r+s}
inline LinOp G_block(int sign, long r, long s, const QContext& ctx) {
    QContext cc = ctx;
    return {2, 2, [cc, sign, r, s](const BasisIndex& in, cplx c, SparseVector& out) {
                GElement g = g_elem(sign, r, s, in[0].v, in[1].v, cc);
                if (g.coef != 0.0) out.add(g.target, c * g.coef);
            }};
}

// Gamma_N(G^{(sign)}_{r,s}) on H_+ ⊗ H_+:
//   sign +: sum_± sum_j G^{(±)}_{r,j} ⊗ G^{(±)}_{j,s}
//   sign -: sum_± sum_j G^{(∓)}_{r,j} ⊗ G^{(±)}_{j,s}
inline LinOp gamma_N_G(int sign, long r, long s, const QContext& ctx, ScanPolicy pol = {}) {
    QContext cc = ctx;
    return {4, 4, [cc, sign, r, s, pol](const BasisIndex& in, cplx c, SparseVector& out) {
                const long n1 = in[0].v, k1 = in[1].v, n2 = in[2].v, k2 = in[3].v;
                for (int s2 : {1, -1}) {
                    const int s1 = sign > 0 ? s2 : -s2;
                    double mx = 0.0;
                    int small = 0;
                    for (long j = 0; j < 4000; ++j) {
                        GElement g1 = g_elem(s1, r, j, n1, k1, cc);
                        GElement g2 = g_elem(s2, j, s, n2, k2, cc);
                        double v = g1.coef * g2.coef;
                        // the second factor decays in j even where the product vanishes
                        double scale = std::abs(g2.coef);
                        mx = std::max(mx, scale);
                        if (v != 0.0) out.add(g1.target.concat(g2.target), c * v);
                        small = (scale <= pol.drop * mx) ? small + 1 : 0;
                        if (small >= pol.tail_run && j + 1 >= pol.min_steps) break;
                    }
                }
            }};
}

// Delta_{0+}(L_{0+}) as the series sum_k (q^2;q^2)_k^{-1} a_0^k L_{0+} b_+^k ⊗ a_0^k L_{0+} (-q b_+^*)^k, k <= k_cut
inline LinOp L0p_series(long k_cut, const QContext& ctx) {
    QContext cc = ctx;
    return {4, 4, [cc, k_cut](const BasisIndex& in, cplx c, SparseVector& out) {
                const double q = cc.q();
                detail::Lat<double> lat(q);
                const long n1 = in[0].v, j1 = in[1].v, n2 = in[2].v, j2 = in[3].v;
                auto l0p = [&](long n) { return std::sqrt(lat.poch(1, 2 * n + 2, 2, -1)); };
                for (long k = 0; k <= k_cut; ++k) {
                    double coef = 1.0 / lat.poch(1, 2, 2, k);
                    // left factor: b_+^k e_{n1} ⊗ e_{j1} = q^{k n1} e_{n1} ⊗ e_{j1+k}
                    double left = qp(q, k * n1) * l0p(n1);
                    // right factor: (-q b_+^*)^k e_{n2} ⊗ e_{j2} = (-q)^k q^{k n2} e_{n2} ⊗ e_{j2-k}
                    double right = num::neg1pow(k) * qp(q, k + k * n2) * l0p(n2);
                    double v = coef * left * right;
                    if (v == 0.0) continue;
                    out.add({L(n1 - k), L(j1 + k), L(n2 - k), L(j2 - k)}, c * v);
                }
            }};
}

}  // namespace ops

// ---- materialized builders ----------------------------------------------------

struct SU2Generators {
    TruncatedOperator a_plus, b_plus;
};
struct E2Generators {
    TruncatedOperator a_zero, b_zero;
};
struct SphereGenerators {
    TruncatedOperator Y_plus, Y_minus, W_plus, W_minus;
};

inline SU2Generators gen_su2(const Window& w, const QContext& ctx) {
    w.validate();
    Signature s = hilbert_signature(Family::Plus);
    return {TruncatedOperator::from_linop(ops::a_plus(ctx), s, s, w),
            TruncatedOperator::from_linop(ops::b_plus(ctx), s, s, w)};
}

inline E2Generators gen_e2(const Window& w, const QContext& ctx) {
    w.validate();
    Signature s = hilbert_signature(Family::Zero);
    return {TruncatedOperator::from_linop(ops::a_zero(), s, s, w), TruncatedOperator::from_linop(ops::b_zero(ctx), s, s, w)};
}

inline SphereGenerators gen_sphere(const Window& w, const QContext& ctx) {
    w.validate();
    Signature s{LegKind::N};
    return {TruncatedOperator::from_linop(ops::sphere_Y(1, ctx), s, s, w),
            TruncatedOperator::from_linop(ops::sphere_Y(-1, ctx), s, s, w),
            TruncatedOperator::from_linop(ops::sphere_W(1, ctx), s, s, w),
            TruncatedOperator::from_linop(ops::sphere_W(-1, ctx), s, s, w)};
}

inline TruncatedOperator coaction_sphere(ops::SphereGen x, const Window& w, const QContext& ctx) {
    w.validate();
    Signature s = sphere_bundle_signature();
    return TruncatedOperator::from_linop(ops::coaction(x, ctx), s, s, w);
}

// Tridiagonal restriction of the coaction of W to the invariant subspace K^{t,p}.
// Index i = 0..n_cut stands for e_n ⊗ e_{t-n} ⊗ e_{p+n} with n = i (p >= 0), or for
// e_{k-p} ⊗ e_{t-k+p} ⊗ e_k with k = i (p < 0).
inline double jacobi_diag(long p, long i, double q) {
    long n = p >= 0 ? i : i - p, k = p + n;
    return (1.0 - (1.0 + q * q) * ops::qp(q, 2 * n)) * ops::qp(q, 2 * k);
}
inline double jacobi_off(long p, long i, double q) {  // entry (i+1, i)
    long n = p >= 0 ? i : i - p, k = p + n;
    return ops::qp(q, n) * std::sqrt(1.0 - ops::qp(q, 2 * n + 2)) * std::sqrt(1.0 - ops::qp(q, 4 * k + 4));
}

inline TruncatedOperator jacobi_block(long p, const Window& w, const QContext& ctx) {
    w.validate();
    Signature s{LegKind::N};
    TruncatedOperator t(s, s);
    const double q = ctx.q();
    for (long i = 0; i <= w.n_cut; ++i) {
        BasisIndex col = BasisIndex::plain({static_cast<int>(i)});
        t.set(col, col, jacobi_diag(p, i, q));
        if (i + 1 <= w.n_cut) {
            BasisIndex nxt = BasisIndex::plain({static_cast<int>(i + 1)});
            double o = jacobi_off(p, i, q);
            t.set(nxt, col, o);
            t.set(col, nxt, o);
        }
    }
    return t;
}

inline Eigen::MatrixXd jacobi_dense(long p, long size, double q) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
    for (long i = 0; i < size; ++i) {
        m(i, i) = jacobi_diag(p, i, q);
        if (i + 1 < size) m(i + 1, i) = m(i, i + 1) = jacobi_off(p, i, q);
    }
    return m;
}

// Functions of the coaction of W computed block by block: each K^{t,p} block is
// diagonalized at a finite size and only its leading corner is used, which is
// accurate because eigenvectors with small eigenvalue live far down the block.
enum class BlockFunction {
    Sign,            // sign of the coaction of W
    UnitProjection,  // projection onto the eigenvalues ±1
};

inline const Eigen::MatrixXd& jacobi_function(long p, BlockFunction f, double q, long size) {
    thread_local std::map<std::array<long long, 4>, Eigen::MatrixXd> cache;
    std::array<long long, 4> key{detail::qbits(q), p, static_cast<long long>(f), size};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi_dense(p, size, q));
    Eigen::VectorXd d = es.eigenvalues();
    const double cut = (1.0 + q * q) / 2.0;
    for (long i = 0; i < d.size(); ++i) {
        if (f == BlockFunction::Sign)
            d(i) = d(i) > 0 ? 1.0 : -1.0;
        else
            d(i) = std::abs(d(i)) > cut ? 1.0 : 0.0;
    }
    Eigen::MatrixXd m = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    return cache.emplace(key, std::move(m)).first->second;
}

// Block size giving the same corner accuracy as 96 at q = 0.5; the truncation error
// of the corner decays like a power of q in the size.
inline long default_block_size(double q) {
    return std::clamp(static_cast<long>(std::ceil(96.0 * std::log(0.5) / std::log(q))), 96L, 1024L);
}

// The block function as a lazy operator on l2(N) ⊗ l2(Z) ⊗ l2(N). Inputs deeper
// than size/2 into their block are rejected. size 0 picks default_block_size.
inline LinOp block_function_op(BlockFunction f, const QContext& ctx, long size = 0) {
    const double q = ctx.q();
    if (size <= 0) size = default_block_size(q);
    return {3, 3, [q, f, size](const BasisIndex& in, cplx c, SparseVector& out) {
                const long n = in[0].v, m = in[1].v, k = in[2].v;
                const long t = n + m, p = k - n, i = p >= 0 ? n : k;
                if (2 * i >= size) throw Error(ErrorCode::WindowTooSmall, "block function input too deep");
                const Eigen::MatrixXd& F = jacobi_function(p, f, q, size);
                for (long j = 0; j < size; ++j) {
                    double v = F(j, i);
                    if (std::abs(v) < 1e-300) continue;
                    if (p >= 0)
                        out.add({ops::L(j), ops::L(t - j), ops::L(p + j)}, c * v);
                    else
                        out.add({ops::L(j - p), ops::L(t - j + p), ops::L(j)}, c * v);
                }
            }};
}

// W_mu^* materialized with columns e_r ⊗ e_s ⊗ e_p ⊗ e_t over the window; W_mu is
// its adjoint. The number of columns grows like the fourth power of the window.
inline TruncatedOperator multiplicative_unitary_adjoint(Family fam, const Window& w, const QContext& ctx) {
    w.validate();
    return TruncatedOperator::from_linop(ops::W_adj(fam, ctx), w_range_signature(fam), pair_signature(fam), w);
}

inline TruncatedOperator multiplicative_unitary(Family fam, const Window& w, const QContext& ctx) {
    return multiplicative_unitary_adjoint(fam, w, ctx).adjoint();
}

// Delta_{mu nu}(x) on the interior columns of the window (rows kept untruncated).
inline TruncatedOperator comult(const TruncatedOperator& x, CornerLabel corner, const Window& w, const QContext& ctx) {
    w.validate();
    if (x.domain() != hilbert_signature(corner.nu) || x.codomain() != hilbert_signature(corner.mu))
        throw Error(ErrorCode::SignatureMismatch, "x does not map H_nu to H_mu for this corner");
    LinOp d = ops::comult_op(as_linop(x), corner, ctx);
    TruncatedOperator out(pair_signature(corner.nu), pair_signature(corner.mu));
    for (const auto& col : window_basis(pair_signature(corner.nu), w, true)) {
        SparseVector v = d(col);
        for (const auto& [row, c] : v) out.set(row, col, c);
    }
    return out;
}

inline TruncatedOperator implementing_unitary_G(const Window& w, const QContext& ctx) {
    w.validate();
    return TruncatedOperator::from_linop(ops::G(ctx), sphere_bundle_signature(), g_range_signature(), w);
}

// G^{(sign)}_{r,s} from its factorization into linking operators:
//   s >= r: c f L_{-0} a_0^{r+s+1} L_{0+} K_{r,s}(b*b) b^{s-r}   (f only for sign -)
//   r >  s: c L_{-0} a_0^{r+s+1} L_{0+} K_{r,s}(b*b) (-q b*)^{r-s}
// The ± in f is absorbed by using (±1)^{m+1} on the final I_- index m.
inline double g_block_constant(int sign, long r, long s, const QContext& ctx) {
    return num::escalate(
        [&](auto tag) {
            using R = decltype(tag);
            detail::Lat<R> lat(ctx.q());
            long hi = std::max(r, s), lo = std::min(r, s);
            R c = lat.pw((lo - hi) * (3 * lo + hi + 1) / 2) * num::rsqrt(lat.poch(1, 4, 4, hi) / lat.poch(1, 4, 4, lo)) *
                  lat.poch(sign, 2 * hi - 2 * lo + 2, 2, -1) / lat.poch(1, 4, 4, -1) / num::rsqrt(R(2));
            if (num::sgnpow(sign, hi) < 0) c = -c;
            return detail::exact(c);
        },
        detail::coef_tol());
}

inline LinOp g_block_factored_op(int sign, long r, long s, const QContext& ctx) {
    LinOp shift = identity_op(2);
    for (long i = 0; i < r + s + 1; ++i) shift = compose(ops::a_zero(), shift);
    LinOp tail = identity_op(2);
    if (s >= r)
        for (long i = 0; i < s - r; ++i) tail = compose(ops::b_plus(ctx), tail);
    else
        for (long i = 0; i < r - s; ++i) tail = compose(scaled(ops::b_plus_adj(ctx), -ctx.q()), tail);
    LinOp core = compose({ops::Lm0(sign, ctx), shift, ops::L0p(ctx), ops::K_of_bb(r, s, sign, ctx), tail});
    if (s >= r) core = compose(ops::f_op(), core);
    return scaled(core, g_block_constant(sign, r, s, ctx));
}

inline TruncatedOperator g_block_factored(int sign, long r, long s, const Window& w, const QContext& ctx) {
    w.validate();
    if (r < 0 || s < 0) throw Error(ErrorCode::InvalidIndex, "block labels must be non-negative");
    // materialize each factor on the window and multiply
    Signature hp = hilbert_signature(Family::Plus), h0 = hilbert_signature(Family::Zero),
              hm = hilbert_signature(Family::Minus);
    TruncatedOperator tail = TruncatedOperator::identity(hp, w);
    if (s >= r) {
        auto b = TruncatedOperator::from_linop(ops::b_plus(ctx), hp, hp, w);
        for (long i = 0; i < s - r; ++i) tail = b.mul(tail);
    } else {
        auto b = TruncatedOperator::from_linop(scaled(ops::b_plus_adj(ctx), -ctx.q()), hp, hp, w);
        for (long i = 0; i < r - s; ++i) tail = b.mul(tail);
    }
    auto K = TruncatedOperator::from_linop(ops::K_of_bb(r, s, sign, ctx), hp, hp, w);
    auto L0 = TruncatedOperator::from_linop(ops::L0p(ctx), hp, h0, w);
    auto a0 = TruncatedOperator::from_linop(ops::a_zero(), h0, h0, w);
    TruncatedOperator mid = L0.mul(K.mul(tail));
    for (long i = 0; i < r + s + 1; ++i) mid = a0.mul(mid);
    auto Lm = TruncatedOperator::from_linop(ops::Lm0(sign, ctx), h0, hm, w);
    TruncatedOperator out = Lm.mul(mid);
    if (s >= r) out = TruncatedOperator::from_linop(ops::f_op(), hm, hm, w).mul(out);
    return out.scaled(g_block_constant(sign, r, s, ctx));
}

}  // namespace qlink
