#pragma once
// Coefficient functions P+, P0, P-, Q, the matrix elements of the implementing
// unitary, K polynomials, and assembly of the xi basis vectors.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qlink/context.hpp"
#include "qlink/index.hpp"
#include "qlink/numeric.hpp"
#include "qlink/qseries.hpp"
#include "qlink/sparse.hpp"

namespace qlink {

enum class Family { Plus, Zero, Minus };

inline const char* to_string(Family f) {
    switch (f) {
        case Family::Plus: return "+";
        case Family::Zero: return "0";
        case Family::Minus: return "-";
    }
    return "?";
}

inline LegKind index_kind(Family f) {
    switch (f) {
        case Family::Plus: return LegKind::N;
        case Family::Zero: return LegKind::Z;
        case Family::Minus: return LegKind::Im;
    }
    return LegKind::Z;
}

namespace detail {

using Key = std::array<long long, 8>;
struct KeyHash {
    std::size_t operator()(const Key& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (long long x : k) {
            h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

inline long long qbits(double q) {
    long long b;
    std::memcpy(&b, &q, sizeof b);
    return b;
}

template <class V>
std::unordered_map<Key, V, KeyHash>& memo() {
    thread_local std::unordered_map<Key, V, KeyHash> m;
    return m;
}

// Lattice arithmetic at working precision R: powers of q and Pochhammer symbols
// (sig q^e; q^b)_n with exactly detected vanishing factors.
template <class R>
struct Lat {
    double qd;
    R q;
    R q2;
    explicit Lat(double qq) : qd(qq), q(qq), q2(R(qq) * R(qq)) {}

    R pw(long e) const { return num::rpow(q, e); }

    R poch(int sig, long e, long b, long n) const {
        Key k{qbits(qd), sig, e, b, n, 0, 0, -1};  // last slot keeps these apart from coefficient keys
        auto& m = memo<R>();
        auto it = m.find(k);
        if (it != m.end()) return it->second;
        R v = poch_raw(sig, e, b, n);
        if (m.size() > 2000000) m.clear();
        m.emplace(k, v);
        return v;
    }

    R poch_raw(int sig, long e, long b, long n) const {
        R prod(1);
        R x = pw(e);
        const R qb = pw(b);
        if (n >= 0) {
            for (long k = 0; k < n; ++k) {
                if (sig == 1 && e + b * k == 0) return R(0);
                prod *= R(1) - R(sig) * x;
                x *= qb;
            }
            return prod;
        }
        if (sig == 1 && e <= 0 && (-e) % b == 0) return R(0);
        const R stop = num::eps<R>() * (R(1) - qb) / R(8);
        for (long k = 0;; ++k) {
            if (e + b * k > 0 && x < stop) {
                prod *= R(1) - R(sig) * x / (R(1) - qb);
                return prod;
            }
            prod *= R(1) - R(sig) * x;
            x *= qb;
        }
    }
};

template <class R>
R csqrt(const R& x) {
    if (x < 0) {
        // tiny negative values are rounding noise around an exact zero
        if (-x < R(1e-300)) return R(0);
        throw Error(ErrorCode::NegativeRadicand, "square root of a negative coefficient factor");
    }
    return num::rsqrt(x);
}

template <class R>
num::Val<R> combine(const R& pre, const num::Series<R>& s, int rel_ops = 256) {
    R v = pre * s.value;
    return {v, num::absv(pre) * num::series_err(s) + num::absv(v) * R(rel_ops) * num::eps<R>()};
}

template <class R>
num::Val<R> exact(const R& v, int rel_ops = 256) {
    return {v, num::absv(v) * R(rel_ops) * num::eps<R>()};
}

inline num::Tolerance coef_tol() { return {1e-19, 1e-13}; }

template <class R>
R eps_for() {
    return num::eps<R>() / R(16);
}

constexpr long kMaxTerms = 4000;

// ---- kernels -------------------------------------------------------------

// Psi form of P+
template <class R>
num::Val<R> pplus_psi_k(const Lat<R>& L, long p, long v, long w) {
    R pre = L.pw((p - w) + (p - w) * (v - w)) * csqrt(L.poch(1, 2 * w + 2, 2, -1)) /
            (L.poch(1, 2, 2, -1) * csqrt(L.poch(1, 2 * p + 2, 2, -1) * L.poch(1, 2 * v + 2, 2, -1)));
    if ((p - w) & 1) pre = -pre;
    auto s = num::psi(L.pw(2 * v + 2), L.pw(2 * v - 2 * w + 2), L.q2, L.pw(2 * p - 2 * w + 2), eps_for<R>(), kMaxTerms);
    return combine(pre, s);
}

// terminating 3phi2 form of P+
template <class R>
num::Val<R> pplus_alt_k(const Lat<R>& L, long p, long v, long w) {
    R pre = L.pw(v * w + p * (v + w + 1)) * csqrt(L.poch(1, 2 * v + 2, 2, -1) * L.poch(1, 2 * p + 2, 2, -1)) /
            csqrt(L.poch(1, 2, 2, -1) * L.poch(1, 2, 2, w));
    if (p & 1) pre = -pre;
    std::vector<R> as{L.pw(-2 * w), L.pw(-2 * v), L.pw(-2 * p)};
    std::vector<R> bs{R(0), R(0)};
    auto s = num::phi(as, bs, L.q2, L.q2, std::min({p, v, w}), eps_for<R>(), kMaxTerms);
    return combine(pre, s);
}

// P0 depends on a = p - w and t = v - w only; F(a,t) = (-q)^{a-t} F(t,a) moves the
// series argument to the small side.
template <class R>
num::Val<R> pzero_k(const Lat<R>& L, long a, long t) {
    int sign = 1;
    long shift = 0;
    if (a < t) {
        shift = a - t;
        if ((a - t) & 1) sign = -1;
        std::swap(a, t);
    }
    R pre = L.pw(shift + a + a * t) / L.poch(1, 2, 2, -1);
    if (a & 1) sign = -sign;
    if (sign < 0) pre = -pre;
    auto s = num::psi(R(0), L.pw(2 * t + 2), L.q2, L.pw(2 * a + 2), eps_for<R>(), kMaxTerms);
    return combine(pre, s);
}

// P- at a triple already ordered so that p >= v >= w.
template <class R>
num::Val<R> pminus_sorted_k(const Lat<R>& L, long p, int rho, long v, int nu, long w, int om) {
    long e = p + v - w;
    R pre = L.pw((p - w) + e * (e + 1) / 2) *
            csqrt(L.poch(-rho, -2 * p, 2, -1) * L.poch(-nu, -2 * v, 2, -1)) /
            (L.poch(1, 4, 4, -1) * csqrt(L.poch(-om, -2 * w, 2, -1)));
    int sg = num::sgnpow(-rho, p - w) * num::sgnpow(nu, v + 1);
    if (sg < 0) pre = -pre;
    pre /= num::rsqrt(R(2));
    auto s = num::psi(R(-nu) * L.pw(2 * v + 2), R(nu * om) * L.pw(2 * v - 2 * w + 2), L.q2,
                      R(rho * om) * L.pw(2 * p - 2 * w + 2), eps_for<R>(), kMaxTerms);
    return combine(pre, s);
}

// Q(p_sg, r, n)
template <class R>
num::Val<R> qcoeff_k(const Lat<R>& L, long p, int sg, long r, long n) {
    R pre = L.pw(r + n * (n - 1) / 2) * L.poch(-sg, 2 * p + 2 * r + 2, 2, n) * csqrt(L.poch(1, 4 * p + 4 * n + 4, 4, -1)) /
            csqrt(L.poch(-sg, 2 * p + 2 * r + 2, 2, -1) * L.poch(1, 4, 4, r) * L.poch(-1, 0, 2, -1) * L.poch(1, 2, 2, n));
    int s = num::sgnpow(-sg, r) * num::sgnpow(sg, n);
    if (s < 0) pre = -pre;
    std::vector<R> as{L.pw(-2 * n), L.pw(-2 * r), R(sg) * L.pw(-2 * p - 2 * n)};
    std::vector<R> bs{R(-sg) * L.pw(-2 * p - 2 * n - 2 * r), R(0)};
    auto ser = num::phi(as, bs, L.q2, L.q2, std::min(n, r), eps_for<R>(), kMaxTerms);
    return combine(pre, ser);
}

template <class R>
R g_prefactor(const Lat<R>& L, int sg, long r, long s, long n) {
    R pre = L.pw(r + n * (n - 1) / 2) * csqrt(L.poch(-sg, 2 * s + 2 * r - 2 * n + 2, 2, n) * L.poch(1, 2 * n + 2, 2, -1)) /
            csqrt(L.poch(-sg, 2 * s + 2 * r + 2, 2, -1) * L.poch(1, 4, 4, r) * L.poch(1, 4, 4, s));
    if (num::sgnpow(-sg, r) < 0) pre = -pre;
    return pre;
}

template <class R>
num::Val<R> g_k(const Lat<R>& L, int sg, long r, long s, long n) {
    R pre = g_prefactor(L, sg, r, s, n);
    if (num::sgnpow(sg, n) < 0) pre = -pre;
    std::vector<R> as{L.pw(-2 * n), L.pw(-2 * r), R(sg) * L.pw(-2 * s)};
    std::vector<R> bs{R(-sg) * L.pw(-2 * s - 2 * r), R(0)};
    auto ser = num::phi(as, bs, L.q2, L.q2, std::min(n, r), eps_for<R>(), kMaxTerms);
    auto v = combine(pre, ser);
    v.v /= num::rsqrt(R(2));
    v.err /= num::rsqrt(R(2));
    return v;
}

template <class R>
num::Val<R> galt_k(const Lat<R>& L, int sg, long r, long s, long n) {
    R pre = g_prefactor(L, sg, r, s, n);
    std::vector<R> as{L.pw(-2 * n), R(sg) * L.pw(-2 * r), L.pw(-2 * s)};
    std::vector<R> bs{R(-sg) * L.pw(-2 * s - 2 * r), R(0)};
    auto ser = num::phi(as, bs, L.q2, L.q2, std::min(n, s), eps_for<R>(), kMaxTerms);
    auto v = combine(pre, ser);
    v.v /= num::rsqrt(R(2));
    v.err /= num::rsqrt(R(2));
    return v;
}

template <class R>
num::Val<R> kpoly_k(const Lat<R>& L, long r, long s, int sg, const R& x) {
    long m = std::min(r, s);
    std::vector<R> as{L.pw(-2 * m), -L.pw(-2 * m)};
    std::vector<R> bs{R(sg) * L.pw(2 * std::abs(r - s) + 2)};
    auto ser = num::phi(as, bs, L.q2, L.q2 * x, m, eps_for<R>(), kMaxTerms);
    return combine(R(1), ser);
}

template <class F>
double cached(const Key& k, F&& f) {
    auto& m = memo<double>();
    auto it = m.find(k);
    if (it != m.end()) return it->second;
    double v = num::escalate(std::forward<F>(f), coef_tol());
    if (m.size() > 4000000) m.clear();
    m.emplace(k, v);
    return v;
}

enum Tag : long long { kPplus = 1, kPplusAlt, kPzero, kPminus, kQ, kG, kGalt };

}  // namespace detail

// ---- public coefficient functions ------------------------------------------

inline double p_plus(long p, long v, long w, const QContext& ctx) {
    if (p < 0 || v < 0 || w < 0) throw Error(ErrorCode::InvalidIndex, "P+ arguments must lie in N");
    return detail::cached({detail::qbits(ctx.q()), detail::kPplus, p, v, w, 0, 0, 0}, [&](auto tag) {
        return detail::pplus_psi_k(detail::Lat<decltype(tag)>(ctx.q()), p, v, w);
    });
}

inline double p_plus_alt(long p, long v, long w, const QContext& ctx) {
    if (p < 0 || v < 0 || w < 0) throw Error(ErrorCode::InvalidIndex, "P+ arguments must lie in N");
    return detail::cached({detail::qbits(ctx.q()), detail::kPplusAlt, p, v, w, 0, 0, 0}, [&](auto tag) {
        return detail::pplus_alt_k(detail::Lat<decltype(tag)>(ctx.q()), p, v, w);
    });
}

inline double p_zero(long p, long v, long w, const QContext& ctx) {
    const long a = p - w, t = v - w;
    return detail::cached({detail::qbits(ctx.q()), detail::kPzero, a, t, 0, 0, 0, 0}, [&](auto tag) {
        return detail::pzero_k(detail::Lat<decltype(tag)>(ctx.q()), a, t);
    });
}

// P-(p_rho, v_nu, w_om). Zero outside I_- and when c(v)c(w) != c(p).
// Evaluated at the descending rearrangement of the triple; two exchange rules
// relate the orderings:
//   P(x0,x1,x2) = (-1)^{x0+x1} c2^{x2+1} q^{x0-x1} P(x1,x0,x2)
//   P(x0,x1,x2) = c0^{x0+1} c1^{x1+1} c2^{x2+1} P(x0,x2,x1)
// where ci is the sign label travelling with xi.
inline double p_minus(SignedIndex p, SignedIndex v, SignedIndex w, const QContext& ctx) {
    if (!in_Iminus(p) || !in_Iminus(v) || !in_Iminus(w)) return 0.0;
    if (p.sign != v.sign * w.sign) return 0.0;
    std::array<SignedIndex, 3> x{p, v, w};
    int sign = 1;
    long qexp = 0;
    for (int pass = 0; pass < 3; ++pass) {
        if (x[0].value < x[1].value) {
            sign *= num::neg1pow(x[0].value + x[1].value) * num::sgnpow(x[2].sign, x[2].value + 1);
            qexp += x[0].value - x[1].value;
            std::swap(x[0], x[1]);
        }
        if (x[1].value < x[2].value) {
            sign *= num::sgnpow(x[0].sign, x[0].value + 1) * num::sgnpow(x[1].sign, x[1].value + 1) *
                    num::sgnpow(x[2].sign, x[2].value + 1);
            std::swap(x[1], x[2]);
        }
    }
    const double base = detail::cached(
        {detail::qbits(ctx.q()), detail::kPminus, x[0].value, x[0].sign, x[1].value, x[1].sign, x[2].value, x[2].sign},
        [&](auto tag) {
            using R = decltype(tag);
            auto r = detail::pminus_sorted_k(detail::Lat<R>(ctx.q()), x[0].value, x[0].sign, x[1].value, x[1].sign,
                                             x[2].value, x[2].sign);
            return r;
        });
    return sign * std::pow(ctx.q(), static_cast<double>(qexp)) * base;
}

// Q(p_sign, r, n): coefficient of e_n ⊗ e_{t-n} ⊗ e_{p+n} in the normalized
// eigenvector of the coaction of W at eigenvalue sign*q^{2r}.
inline double q_coeff(SignedIndex p, long r, long n, const QContext& ctx) {
    if (r < 0 || n < 0) throw Error(ErrorCode::InvalidIndex, "Q needs r, n >= 0");
    if (p.sign < 0 && p.value + r < 0) return 0.0;
    if (p.value + n < 0) return 0.0;
    return detail::cached({detail::qbits(ctx.q()), detail::kQ, p.value, p.sign, r, n, 0, 0}, [&](auto tag) {
        return detail::qcoeff_k(detail::Lat<decltype(tag)>(ctx.q()), p.value, p.sign, r, n);
    });
}

struct GElement {
    double coef = 0.0;
    BasisIndex target;  // e^{(sign)}_{n-r-s-1} ⊗ e_{k-r+s}
};

inline GElement g_elem(int sign, long r, long s, long n, long k, const QContext& ctx) {
    if (r < 0 || s < 0 || n < 0) throw Error(ErrorCode::InvalidIndex, "G element needs r, s, n >= 0");
    GElement g;
    long m = n - r - s - 1;
    g.target = BasisIndex{Leg{static_cast<int>(m), static_cast<std::int8_t>(sign)}, Leg{static_cast<int>(k - r + s), 1}};
    if (sign < 0 && m >= 0) return g;  // target outside I_-
    g.coef = detail::cached({detail::qbits(ctx.q()), detail::kG, sign, r, s, n, 0, 0}, [&](auto tag) {
        return detail::g_k(detail::Lat<decltype(tag)>(ctx.q()), sign, r, s, n);
    });
    return g;
}

inline GElement g_elem_alt(int sign, long r, long s, long n, long k, const QContext& ctx) {
    if (r < 0 || s < 0 || n < 0) throw Error(ErrorCode::InvalidIndex, "G element needs r, s, n >= 0");
    GElement g;
    long m = n - r - s - 1;
    g.target = BasisIndex{Leg{static_cast<int>(m), static_cast<std::int8_t>(sign)}, Leg{static_cast<int>(k - r + s), 1}};
    if (sign < 0 && m >= 0) return g;
    g.coef = detail::cached({detail::qbits(ctx.q()), detail::kGalt, sign, r, s, n, 0, 0}, [&](auto tag) {
        return detail::galt_k(detail::Lat<decltype(tag)>(ctx.q()), sign, r, s, n);
    });
    return g;
}

inline double k_polynomial(long r, long s, int sign, double x, const QContext& ctx) {
    if (r < 0 || s < 0) throw Error(ErrorCode::InvalidIndex, "K polynomial needs r, s >= 0");
    return num::escalate(
        [&](auto tag) {
            using R = decltype(tag);
            return detail::kpoly_k(detail::Lat<R>(ctx.q()), r, s, sign, R(x));
        },
        detail::coef_tol());
}

// ---- support scanning -------------------------------------------------------

struct ScanPolicy {
    double drop = 1e-17;  // stop once values fall below drop * running max
    int tail_run = 10;    // ... for this many consecutive indices (coefficient rows have short runs of near-zeros)
    int min_steps = 6;
    int max_steps = 6000;
};

struct ScanResult {
    std::vector<std::pair<long, double>> values;  // (index, value), increasing index
    double tail = 0.0;                            // l2 bound of everything not stored
};

namespace detail {

// Geometric-majorant l2 bound for the tail beyond the last two values.
inline double geometric_tail(double last, double prev) {
    double a = std::abs(last), b = std::abs(prev);
    double rho = (b > 0.0) ? std::min(a / b, 0.9) : 0.9;
    if (!(rho >= 0.0)) rho = 0.9;
    return a * rho / std::sqrt(1.0 - rho * rho);
}

}  // namespace detail

// Scans c(k) from k0 outward in both directions, staying inside [lo, hi].
template <class F>
ScanResult scan_support(F&& c, long k0, long lo, long hi, const ScanPolicy& pol = {}) {
    k0 = std::clamp(k0, lo, hi);
    std::vector<std::pair<long, double>> up, down;
    double mx = 0.0;
    double tail2 = 0.0;
    auto run = [&](long start, long step, std::vector<std::pair<long, double>>& out) {
        int small = 0;
        double prev = 0.0, last = 0.0;
        for (long i = 0;; ++i) {
            long k = start + step * i;
            if (k < lo || k > hi) return;
            if (i >= pol.max_steps)
                throw Error(ErrorCode::WindowTooSmall, "coefficient support did not decay within the scan budget");
            double v = c(k);
            mx = std::max(mx, std::abs(v));
            out.emplace_back(k, v);
            prev = last;
            last = v;
            if (std::abs(v) <= pol.drop * mx)
                ++small;
            else
                small = 0;
            if (small >= pol.tail_run && i + 1 >= pol.min_steps) {
                double t = detail::geometric_tail(last, prev);
                tail2 += t * t;
                return;
            }
        }
    };
    run(k0, 1, up);
    run(k0 - 1, -1, down);
    ScanResult r;
    r.values.reserve(up.size() + down.size());
    for (auto it = down.rbegin(); it != down.rend(); ++it) r.values.push_back(*it);
    for (auto& x : up) r.values.push_back(x);
    // stored-but-negligible entries stay; they cost nothing and keep sums exact
    r.tail = std::sqrt(tail2);
    return r;
}

// ---- xi vectors ------------------------------------------------------------

struct XiTerm {
    Leg v, w;
    double coef;
};

struct XiCoeffs {
    std::vector<XiTerm> terms;
    double tail = 0.0;
};

namespace detail {

inline constexpr long kBig = 1L << 28;

inline XiCoeffs xi_coeffs_raw(Family fam, SignedIndex p, long t, const QContext& ctx, const ScanPolicy& pol) {
    XiCoeffs out;
    auto push = [&](const ScanResult& sr, int vs, int ws) {
        for (const auto& [w, c] : sr.values)
            if (c != 0.0) out.terms.push_back({Leg{static_cast<int>(w + t), static_cast<std::int8_t>(vs)},
                                              Leg{static_cast<int>(w), static_cast<std::int8_t>(ws)}, c});
        out.tail = std::hypot(out.tail, sr.tail);
    };
    switch (fam) {
        case Family::Plus: {
            if (p.value < 0 || p.sign != 1) throw Error(ErrorCode::InvalidIndex, "family + needs p in N");
            long lo = std::max(0L, -t);
            auto sr = scan_support([&](long w) { return p_plus_alt(p.value, w + t, w, ctx); }, lo, lo, kBig, pol);
            push(sr, 1, 1);
            break;
        }
        case Family::Zero: {
            auto sr = scan_support([&](long w) { return p_zero(p.value, w + t, w, ctx); }, p.value, -kBig, kBig, pol);
            push(sr, 1, 1);
            break;
        }
        case Family::Minus: {
            if (!in_Iminus(p)) throw Error(ErrorCode::InvalidIndex, "family - needs p in I_-");
            // sign labels (nu, om) with nu*om = rho
            const int combos[2][2] = {{1, p.sign}, {-1, -p.sign}};
            for (const auto& cb : combos) {
                int nu = cb[0], om = cb[1];
                long hi = kBig;
                if (om < 0) hi = std::min(hi, -1L);
                if (nu < 0) hi = std::min(hi, -1 - t);
                auto sr = scan_support(
                    [&](long w) {
                        return p_minus(p, SignedIndex{static_cast<int>(w + t), nu}, SignedIndex{static_cast<int>(w), om},
                                       ctx);
                    },
                    p.value, -kBig, hi, pol);
                push(sr, nu, om);
            }
            break;
        }
    }
    return out;
}

}  // namespace detail

// Coefficients of xi_{r,s,p,t} (independent of r, s), memoized per thread.
inline const XiCoeffs& xi_coeffs(Family fam, SignedIndex p, long t, const QContext& ctx, const ScanPolicy& pol = {}) {
    thread_local std::unordered_map<detail::Key, std::shared_ptr<XiCoeffs>, detail::KeyHash> cache;
    detail::Key k{detail::qbits(ctx.q()), static_cast<long long>(fam), p.value, p.sign, t,
                  static_cast<long long>(std::llround(-std::log10(pol.drop) * 16)), 0, 0};
    auto it = cache.find(k);
    if (it != cache.end()) return *it->second;
    auto v = std::make_shared<XiCoeffs>(detail::xi_coeffs_raw(fam, p, t, ctx, pol));
    return *cache.emplace(k, v).first->second;
}

inline BasisIndex xi_target(const XiTerm& term, long r, long s, long p) {
    // e_v ⊗ e_{r+p-w} ⊗ e_w ⊗ e_{s-p+v}
    return BasisIndex{term.v, Leg{static_cast<int>(r + p - term.w.v), 1}, term.w,
                      Leg{static_cast<int>(s - p + term.v.v), 1}};
}

// xi_{r,s,p,t} without window truncation.
inline SparseVector xi_full(Family fam, long r, long s, SignedIndex p, long t, const QContext& ctx,
                            const ScanPolicy& pol = {}) {
    const XiCoeffs& c = xi_coeffs(fam, p, t, ctx, pol);
    SparseVector out;
    for (const auto& term : c.terms) out.add(xi_target(term, r, s, p.value), term.coef);
    out.tail_bound = c.tail;
    return out;
}

inline Signature family_signature(Family f) {
    LegKind k = index_kind(f);
    return {k, LegKind::Z, k, LegKind::Z};
}

// xi_{r,s,p,t} restricted to the window; dropped l2 mass is added to tail_bound.
// Throws WindowTooSmall if the tail exceeds max_tail.
inline SparseVector xi_vector(Family fam, long r, long s, SignedIndex p, long t, const Window& win,
                              const QContext& ctx, double max_tail = 1e-6) {
    win.validate();
    SparseVector full = xi_full(fam, r, s, p, t, ctx);
    SparseVector out;
    double dropped2 = full.tail_bound * full.tail_bound;
    const Signature sig = family_signature(fam);
    for (const auto& [k, c] : full) {
        if (in_window(k, sig, win))
            out.add(k, c);
        else
            dropped2 += std::norm(c);
    }
    out.tail_bound = std::sqrt(dropped2);
    if (out.tail_bound > max_tail)
        throw Error(ErrorCode::WindowTooSmall, "xi vector support leaves the window (tail " +
                                                   std::to_string(out.tail_bound) + ")");
    return out;
}

}  // namespace qlink
