#pragma once
// Public q-series API: Pochhammer symbols, basic hypergeometric series, Psi,
// Wall and big q-Laguerre polynomials, the 1phi1 q-Bessel function.
#include <algorithm>
#include <optional>
#include <vector>

#include "qlink/context.hpp"
#include "qlink/numeric.hpp"

namespace qlink {

struct HyperSeriesSpec {
    std::vector<cplx> numerators;
    std::vector<cplx> denominators;
    double base = 0.0;
    cplx z{0.0, 0.0};
    std::optional<long> termination;  // explicit last index when a numerator is base^{-m}
};

namespace detail {

inline void check_base(double base) {
    if (!(base > 0.0 && base < 1.0))
        throw Error(ErrorCode::InvalidBase, "series base must lie in (0,1), got " + std::to_string(base));
}

// Cut-off used at a given precision tier: the caller's eps_term at double, and
// never coarser than the tier's own epsilon above it.
template <class R>
R tier_eps(const QContext& ctx) {
    R e(ctx.eps_term());
    if constexpr (std::is_same_v<R, double>) {
        return e;
    } else {
        R w = num::eps<R>();
        return e < w ? e : w;
    }
}

inline num::Tolerance api_tol(const QContext& ctx) {
    return {1e-300, std::max(1e-13, 8.0 * ctx.eps_term())};
}

template <class R>
std::vector<num::Cx<R>> lift(const std::vector<cplx>& v) {
    std::vector<num::Cx<R>> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(num::from_cplx<R>(x));
    return out;
}

}  // namespace detail

// (a;base)_n; n = nullopt means the infinite product.
inline cplx qpochhammer(cplx a, double base, std::optional<long> n, const QContext& ctx) {
    detail::check_base(base);
    if (n && *n < 0) throw Error(ErrorCode::InvalidIndex, "Pochhammer length must be non-negative");
    num::Cx<double> ac = num::from_cplx<double>(a);
    double stop = std::min(ctx.eps_term(), num::eps<double>() * (1.0 - base) / 8.0);
    return num::to_cplx(num::poch(ac, base, n ? *n : -1L, stop));
}

inline cplx qpochhammer_multi(const std::vector<cplx>& as, double base, std::optional<long> n, const QContext& ctx) {
    detail::check_base(base);
    cplx prod(1.0, 0.0);
    for (const auto& a : as) {
        cplx f = qpochhammer(a, base, n, ctx);
        if (f == cplx(0.0, 0.0)) return cplx(0.0, 0.0);
        prod *= f;
    }
    return prod;
}

inline cplx basic_hypergeometric(const HyperSeriesSpec& spec, const QContext& ctx) {
    detail::check_base(spec.base);
    if (spec.termination && *spec.termination < 0)
        throw Error(ErrorCode::InvalidIndex, "termination index must be non-negative");
    if (spec.z == cplx(0.0, 0.0)) return cplx(1.0, 0.0);
    long term = spec.termination ? *spec.termination : -1L;
    return num::escalate_c(
        [&](auto tag) {
            using R = decltype(tag);
            auto s = num::phi(detail::lift<R>(spec.numerators), detail::lift<R>(spec.denominators), R(spec.base),
                              num::from_cplx<R>(spec.z), term, detail::tier_eps<R>(ctx), ctx.max_terms());
            return num::Val<num::Cx<R>>{s.value, num::series_err(s)};
        },
        detail::api_tol(ctx));
}

// Psi(a; b | base, z) = sum_n (a;base)_n (b base^n;base)_inf / (base;base)_n (-1)^n base^{n(n-1)/2} z^n
inline cplx psi(cplx a, cplx b, double base, cplx z, const QContext& ctx) {
    detail::check_base(base);
    return num::escalate_c(
        [&](auto tag) {
            using R = decltype(tag);
            auto s = num::psi(num::from_cplx<R>(a), num::from_cplx<R>(b), R(base), num::from_cplx<R>(z),
                              detail::tier_eps<R>(ctx), ctx.max_terms());
            return num::Val<num::Cx<R>>{s.value, num::series_err(s)};
        },
        detail::api_tol(ctx));
}

namespace detail {

template <class R>
R checked_sqrt(const R& x, const char* what) {
    if (x < 0) throw Error(ErrorCode::NegativeRadicand, what);
    return num::rsqrt(x);
}

template <class R>
num::Val<R> wall_kernel(long w, long p, long t, double qd, const QContext& ctx) {
    R q(qd), q2 = q * q;
    if (t < 0) return {R(0), R(0)};  // (q^{2t+2};q^2)_inf carries the vanishing factor
    R pt = num::poch(num::rpow(q, 2 * t + 2), q2, -1);
    R pp = num::poch(num::rpow(q, 2 * p + 2), q2, -1);
    R pq = num::poch(q2, q2, -1);
    R ptw = num::poch(num::rpow(q, 2 * t + 2), q2, w);
    R pqw = num::poch(q2, q2, w);
    // (q^{2t+2};q^2)_w enters under the square root; without it the family is not normalized
    R pre = num::rpow(q, (p - w) * (t + 1)) * checked_sqrt(R(pt * pp), "Wall prefactor") *
            checked_sqrt(ptw, "Wall prefactor") / (num::rsqrt(pq) * checked_sqrt(pqw, "Wall prefactor"));
    if (w & 1) pre = -pre;
    std::vector<R> as{num::rpow(q, -2 * w), R(0)};
    std::vector<R> bs{num::rpow(q, 2 * t + 2)};
    auto s = num::phi(as, bs, q2, num::rpow(q, 2 * p + 2), w, tier_eps<R>(ctx), ctx.max_terms());
    R v = pre * s.value;
    return {v, num::absv(pre) * num::series_err(s) + num::absv(v) * R(256) * num::eps<R>()};
}

}  // namespace detail

// Normalized Wall polynomial P_w(q^{2p}; q^{2t} | q^2) with q from ctx.
inline double wall_polynomial(long w, long p, long t, const QContext& ctx) {
    if (w < 0 || p < 0) throw Error(ErrorCode::InvalidIndex, "Wall polynomial needs w, p >= 0");
    return num::escalate([&](auto tag) { return detail::wall_kernel<decltype(tag)>(w, p, t, ctx.q(), ctx); },
                         detail::api_tol(ctx));
}

// Big q-Laguerre polynomial 3phi2(base^{-n}, 0, x; a base, b base | base, base).
inline cplx big_q_laguerre(long n, cplx x, double a, double b, double base, const QContext& ctx) {
    if (n < 0) throw Error(ErrorCode::InvalidIndex, "degree must be non-negative");
    HyperSeriesSpec spec;
    spec.numerators = {cplx(std::pow(base, -static_cast<double>(n)), 0.0), cplx(0.0, 0.0), x};
    spec.denominators = {cplx(a * base, 0.0), cplx(b * base, 0.0)};
    spec.base = base;
    spec.z = cplx(base, 0.0);
    spec.termination = n;
    return basic_hypergeometric(spec, ctx);
}

namespace detail {

template <class R>
num::Val<R> q_bessel_k(long alpha, const R& z, const R& bs, const QContext& ctx) {
    R pre = num::rpow(z, alpha) / num::poch(bs, bs, -1);
    auto s = num::psi(R(0), num::rpow(bs, alpha + 1), bs, R(bs * z * z), tier_eps<R>(ctx), ctx.max_terms());
    R v = pre * s.value;
    return {v, num::absv(pre) * num::series_err(s) + num::absv(v) * R(64) * num::eps<R>()};
}

}  // namespace detail

// J_alpha(z; base) = z^alpha / (base;base)_inf * Psi(0; base^{alpha+1} | base, base z^2)
inline double q_bessel(long alpha, double z, double base, const QContext& ctx) {
    detail::check_base(base);
    if (z == 0.0) return alpha == 0 ? 1.0 : (alpha > 0 ? 0.0 : std::numeric_limits<double>::infinity());
    return num::escalate(
        [&](auto tag) {
            using R = decltype(tag);
            return detail::q_bessel_k(alpha, R(z), R(base), ctx);
        },
        detail::api_tol(ctx));
}

// J_alpha(q^k; q^2) with q^k and q^2 formed at working precision. For k << 0 the
// series cancels over many digits and a rounded double argument would already
// perturb the result beyond its own size.
inline double q_bessel_lattice(long alpha, long k, double q, const QContext& ctx) {
    detail::check_base(q);
    return num::escalate(
        [&](auto tag) {
            using R = decltype(tag);
            R qq(q);
            return detail::q_bessel_k(alpha, num::rpow(qq, k), R(qq * qq), ctx);
        },
        detail::api_tol(ctx));
}

}  // namespace qlink
