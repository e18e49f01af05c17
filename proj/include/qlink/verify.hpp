#pragma once
// Named numerical checks. Each check evaluates one family of identities and
// returns a CheckReport; the registry at the bottom drives the CLI and the
// acceptance runner.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qlink/operators.hpp"
#include "qlink/qseries.hpp"

namespace qlink {

using json = nlohmann::json;

struct CheckReport {
    std::string check_id;
    json params = json::object();
    double metric = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    long long runtime_ms = 0;
    std::string relation = "le";  // "le": metric <= tolerance; "ge": metric >= tolerance
    std::string notes;
    json details = json::object();

    void decide() {
        if (!std::isfinite(metric))
            pass = false;
        else
            pass = relation == "ge" ? metric >= tolerance : metric <= tolerance;
    }
};

inline json to_json(const CheckReport& r) {
    json j;
    j["check_id"] = r.check_id;
    j["params"] = r.params;
    j["metric"] = std::isfinite(r.metric) ? json(r.metric) : json(nullptr);
    j["tolerance"] = r.tolerance;
    j["relation"] = r.relation;
    j["pass"] = r.pass;
    j["runtime_ms"] = r.runtime_ms;
    j["notes"] = r.notes;
    j["details"] = r.details;
    return j;
}

struct CheckConfig {
    double q = 0.5;
    Window window{};
    std::uint64_t seed = 42;
    std::map<std::string, double> tol;  // per-check tolerance overrides

    double tolerance_for(const std::string& id, double fallback) const {
        auto it = tol.find(id);
        return it == tol.end() ? fallback : it->second;
    }
    json base_params() const {
        return {{"q", q},
                {"n_cut", window.n_cut},
                {"z_lo", window.z_lo},
                {"z_hi", window.z_hi},
                {"interior_margin", window.interior_margin},
                {"seed", seed}};
    }
};

namespace detail {

inline double vec_dev(const SparseVector& a, const SparseVector& b) { return max_diff(a, b); }

inline double rel_metric(cplx lhs, cplx rhs) {
    double d = std::abs(lhs - rhs);
    return std::abs(rhs) > 1e-10 ? d / std::abs(rhs) : d;
}

// Seed for a check: the run seed mixed with the check name, so that checks do not
// share streams and do not depend on execution order.
inline std::uint64_t stream_seed(std::uint64_t seed, const std::string& name) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ull;
    return seed ^ (h + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
}

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

inline CheckReport start_report(const std::string& id, double tol, json params) {
    CheckReport r;
    r.check_id = id;
    r.tolerance = tol;
    r.params = std::move(params);
    return r;
}

inline const char* sign_str(int s) { return s > 0 ? "+" : "-"; }

}  // namespace detail

// ---- summation identities over complex arguments ---------------------------------

struct SummationCase {
    cplx x{1.0, 0.0};
    cplx y{1.0, 0.0};
    int p = 0;
    int sign = 1;  // only used by the second identity
    int term_cutoff = 400;
};

namespace detail {

// Left and right sides of the three summation identities at working precision R.
//   1: sum_w g_w 3phi2(q^{-2w}, q^{-2w} y/x, q^{-2p}; 0, 0) = (-1;q^2)_p Psi(-1/y; q^2 x/y | q^2, q^{2p+2} x)
//   2: sum_w g_w^± 3phi2(q^{-2w}, q^{-2w}/x, q^{-2p}; -q^{-2p-2w}/x, 0) = Psi(∓1/y; ±q^{2p+2} x/y | q^2, ±q^2 x)
//   3: sum_k f_k 3phi2(q^{-2k}, q^{-2k}/y, q^{-2p}; 0, 0) = Psi(0; q^2 y | q^2, q^{2p+2} x)
template <class R>
std::pair<num::Cx<R>, num::Cx<R>> summation_sides(int which, const SummationCase& c, double qd, const R& eps) {
    using T = num::Cx<R>;
    const R q(qd), Q = q * q;
    const T x = num::from_cplx<R>(c.x), y = num::from_cplx<R>(c.y);
    const long p = c.p;
    const int sg = c.sign;
    auto Qp = [&](long e) { return num::rpow(Q, e); };
    auto pinf = [&](const T& a) { return num::poch(a, Q, -1); };
    auto pn = [&](const T& a, long n) { return num::poch(a, Q, n); };

    num::Accum<T> acc;
    int small = 0;
    for (long w = 0; w < c.term_cutoff; ++w) {
        T term;
        if (which == 1) {
            T xy = x / y;
            T g = num::ipow(xy, w) * T(num::rpow(q, 2 * w * w + 2 * p * w)) * pinf(T(Qp(w + 1)) * xy) *
                  pinf(x * T(Qp(w + 1))) * pn(T(-Q) * x, w) / T(num::poch(Q, Q, w));
            if (w & 1) g = -g;
            std::vector<T> as{T(Qp(-w)), T(Qp(-w)) * y / x, T(Qp(-p))}, bs{T(0), T(0)};
            term = g * num::phi(as, bs, Q, T(Q), std::min(w, p), eps, 100000).value;
        } else if (which == 2) {
            T xy = x / y;
            T g = num::ipow(xy, w) * T(num::rpow(q, 2 * w * w)) * pinf(T(Qp(w + 1)) * xy) *
                  pinf(T(R(sg) * Qp(w + 1)) * x) * pn(T(-Qp(p + 1)) * x, w) / T(num::poch(Q, Q, w));
            if (num::sgnpow(-sg, w) < 0) g = -g;
            std::vector<T> as{T(Qp(-w)), T(Qp(-w)) / x, T(Qp(-p))}, bs{T(-Qp(-p - w)) / x, T(0)};
            term = g * num::phi(as, bs, Q, T(Q), std::min(w, p), eps, 100000).value;
        } else {
            if (w > 0 && (x == T(0) || y == T(0))) break;
            T f = num::ipow(x * y, w) * T(num::rpow(q, w + 3 * w * w + 2 * w * p)) * pinf(T(Qp(w + 1)) * x) *
                  pinf(T(Qp(w + 1)) * y) / T(num::poch(Q, Q, w));
            if (w & 1) f = -f;
            T ph(1);
            if (w > 0) {
                std::vector<T> as{T(Qp(-w)), T(Qp(-w)) / y, T(Qp(-p))}, bs{T(0), T(0)};
                ph = num::phi(as, bs, Q, T(Q), std::min(w, p), eps, 100000).value;
            }
            term = f * ph;
        }
        acc.add(term);
        R ref = std::max(num::absv(acc.value()), acc.mag() * eps);
        small = (num::absv(term) <= eps * ref) ? small + 1 : 0;
        if (small >= 3 && w > p) break;
        if (w + 1 == c.term_cutoff) throw Error(ErrorCode::MaxTermsExceeded, "summation identity did not settle");
    }
    T rhs;
    if (which == 1)
        rhs = pn(T(-1), p) * num::psi(T(-1) / y, T(Q) * x / y, Q, T(Qp(p + 1)) * x, eps, 100000).value;
    else if (which == 2)
        rhs = num::psi(T(R(-sg)) / y, T(R(sg) * Qp(p + 1)) * x / y, Q, T(R(sg) * Q) * x, eps, 100000).value;
    else
        rhs = num::psi(T(0), T(Q) * y, Q, T(Qp(p + 1)) * x, eps, 100000).value;
    return {acc.value(), rhs};
}

// Distance from z to the points -q^{-2m}, m >= m0 (those that matter have |.| <= |z| + 1).
inline double distance_to_neg_lattice(cplx z, double q, long m0) {
    double best = std::numeric_limits<double>::infinity();
    for (long m = m0; m < 4096; ++m) {
        double pt = -std::pow(q, -2.0 * m);
        best = std::min(best, std::abs(z - cplx(pt, 0.0)));
        if (-pt > std::abs(z) + 1.0) break;
    }
    return best;
}

inline CheckReport verify_sum_case(int which, const SummationCase& c, const QContext& ctx, double tol) {
    Stopwatch sw;
    const char* ids[] = {"", "verify_sum1", "verify_sum2", "verify_sum3"};
    CheckReport r = start_report(ids[which], tol,
                                 {{"q", ctx.q()},
                                  {"x", {c.x.real(), c.x.imag()}},
                                  {"y", {c.y.real(), c.y.imag()}},
                                  {"p", c.p},
                                  {"sign", c.sign}});
    if (which != 3 && (c.x == cplx(0, 0) || c.y == cplx(0, 0)))
        throw Error(ErrorCode::InvalidIndex, "summation identity needs non-zero x and y");
    if (which == 2 && distance_to_neg_lattice(c.x, ctx.q(), c.p + 1) < 1e-2)
        throw Error(ErrorCode::PoleHit, "x too close to an excluded pole");
    auto [l, rr] = summation_sides<mp120>(which, c, ctx.q(), mp120(1e-40));
    cplx L = num::to_cplx(l), Rv = num::to_cplx(rr);
    // deviation taken before rounding to double, so agreement past 1e-16 stays visible
    mp120 d = num::absv(l - rr), a = num::absv(rr);
    r.metric = num::to_d(a > mp120(1e-10) ? mp120(d / a) : d);
    r.details = {{"lhs", {L.real(), L.imag()}}, {"rhs", {Rv.real(), Rv.imag()}}};
    r.decide();
    r.runtime_ms = sw.ms();
    return r;
}

}  // namespace detail

inline CheckReport verify_sum1(const SummationCase& c, const QContext& ctx, double tol = 1e-9) {
    return detail::verify_sum_case(1, c, ctx, tol);
}
inline CheckReport verify_sum2(const SummationCase& c, const QContext& ctx, double tol = 1e-9) {
    return detail::verify_sum_case(2, c, ctx, tol);
}
inline CheckReport verify_sum2(SummationCase c, int sign, const QContext& ctx, double tol = 1e-9) {
    c.sign = sign;
    return detail::verify_sum_case(2, c, ctx, tol);
}
inline CheckReport verify_sum3(const SummationCase& c, const QContext& ctx, double tol = 1e-9) {
    return detail::verify_sum_case(3, c, ctx, tol);
}

// Random cases on the annulus 0.3 <= |z| <= 1.5 with p <= p_max, kept 1e-2 away
// from the excluded pole points.
inline std::vector<SummationCase> sample_summation_cases(int which, int count, int p_max, double q, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> rad(0.3, 1.5), ang(0.0, 2.0 * M_PI);
    std::uniform_int_distribution<int> pd(0, p_max);
    auto draw = [&]() { return std::polar(rad(gen), ang(gen)); };
    std::vector<SummationCase> out;
    while (static_cast<int>(out.size()) < count) {
        SummationCase c;
        c.x = draw();
        c.y = draw();
        c.p = pd(gen);
        c.sign = out.size() % 2 == 0 ? 1 : -1;
        if (which == 2 && detail::distance_to_neg_lattice(c.x, q, c.p + 1) < 1e-2) continue;
        out.push_back(c);
    }
    return out;
}

// ---- eigenvectors of the Jacobi blocks --------------------------------------------

namespace detail {

// f_n^{(p)}(x): coefficient n of the formal eigenvector at eigenvalue x in block p.
template <class R>
R eta_coeff(long p, long n, const R& x, double qd) {
    Lat<R> lat(qd);
    const R Q = lat.q2;
    std::vector<R> as, bs;
    R pre;
    if (p >= 0) {
        pre = lat.pw(-n * (n + 4 * p + 3) / 2) *
              num::rsqrt(R(lat.poch(1, 4, 4, p + n) / (lat.poch(1, 4, 4, p) * lat.poch(1, 2, 2, n))));
        as = {lat.pw(-2 * n), R(0), R(-lat.pw(2 * p + 2) * x)};
        bs = {lat.pw(2 * p + 2), R(-lat.pw(2 * p + 2))};
    } else {
        pre = lat.pw(-n * (n - 2 * p + 3) / 2) *
              num::rsqrt(R(lat.poch(1, -2 * p + 2, 2, n) * lat.poch(-1, 2, 2, n) / lat.poch(1, 2, 2, n)));
        as = {lat.pw(-2 * n), R(0), R(-Q * x)};
        bs = {lat.pw(-2 * p + 2), R(-Q)};
    }
    if (n & 1) pre = -pre;
    return pre * num::phi(as, bs, Q, Q, n, num::eps<R>(), 100000).value;
}

// Digits lost to cancellation in the terminating series grow like 2 n^2 log10(1/q).
template <class F>
auto with_digits_for(long n, double q, F&& f) {
    double need = 2.0 * double(n) * double(n + 2) * std::log10(1.0 / q) + 40.0;
    if (need < 100) return f(mp120());
    if (need < 280) return f(mp300());
    if (need < 780) return f(mp800());
    if (need < 1580) return f(mp1600());
    if (need < 3180) return f(mp3200());
    throw Error(ErrorCode::PrecisionExhausted, "eigenvector coefficient needs more than 3200 digits");
}

// f_n^{(p)}(sig q^{2r}) squared, in long double range via log10 where needed.
inline double eta_coeff_d(long p, long n, int sig, long r, double q) {
    return with_digits_for(n, q, [&](auto tag) {
        using R = decltype(tag);
        R x = R(sig) * num::rpow(R(q), 2 * r);
        return num::to_d(eta_coeff<R>(p, n, x, q));
    });
}

// Closed forms of ||eta_{r,±}^{(t,p)}||^2 (three branches).
inline double eta_norm2_closed(long p, long r, int sg, double q) {
    Lat<mp120> lat(q);
    mp120 v;
    if (p >= 0) {
        v = lat.pw(-2 * r) * lat.poch(1, 4, 4, r) * lat.poch(-1, 0, 2, -1) /
            (lat.poch(1, 4 * p + 4, 4, r) * lat.poch(sg, 2 * p + 2 * r + 2, 2, -1));
    } else if (r + p >= 0) {
        v = lat.pw(-p * p - p - 2 * r) * lat.poch(1, 2, 2, -p) * lat.poch(-sg, 2 * r + 2, 2, -1) * lat.poch(-1, 0, 2, -1) /
            (lat.poch(sg, 2 * r + 2, 2, -1) * lat.poch(-sg, 2 * r + 2 * p + 2, 2, -1));
    } else {
        if (sg < 0) throw Error(ErrorCode::InvalidIndex, "no (-) eigenvector when r + p < 0");
        v = lat.pw(r * r - r + 2 * r * p) * lat.poch(1, 2, 2, r) * lat.poch(1, 2, 2, -p) *
            lat.poch(-1, -2 * r - 2 * p, 2, -1) /
            (lat.poch(-1, 2, 2, r) * lat.poch(1, 2, 2, -p - r) * lat.poch(1, -2 * r - 2 * p + 2, 2, -1));
    }
    return num::to_d(v);
}

inline double eta_norm2_direct(long p, long r, int sg, double q, long* used = nullptr) {
    double s = 0.0;
    int small = 0;
    long n = 0;
    for (; n < 400; ++n) {
        double f = eta_coeff_d(p, n, sg, r, q);
        s += f * f;
        small = (f * f <= 1e-19 * s) ? small + 1 : 0;
        if (small >= 3) break;
    }
    if (used) *used = n + 1;
    return s;
}

// Block basis vector i of K^{t,p}.
inline BasisIndex block_index(long t, long p, long i) {
    if (p >= 0) return {ops::L(i), ops::L(t - i), ops::L(p + i)};
    return {ops::L(i - p), ops::L(t - i + p), ops::L(i)};
}

inline SparseVector eta_vector(long t, long p, long r, int sg, double q, long len) {
    SparseVector v;
    for (long i = 0; i < len; ++i) v.add(block_index(t, p, i), eta_coeff_d(p, i, sg, r, q));
    return v;
}

}  // namespace detail

// ---- individual checks -------------------------------------------------------------

// Gram matrix of the xi vectors over the label ranges, per family.
struct GramRanges {
    int rs = 1;      // |r|, |s| <= rs
    int t = 3;       // |t| <= t
    int p_lo = -2;   // p window (family + clips at 0)
    int p_hi = 2;
};

inline CheckReport verify_gram(const std::vector<Family>& fams, const GramRanges& g, const Window& win,
                               const QContext& ctx, double tol = 1e-8) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report(
        "verify_gram", tol,
        {{"q", ctx.q()}, {"n_cut", win.n_cut}, {"z_lo", win.z_lo}, {"z_hi", win.z_hi}, {"rs", g.rs}, {"t", g.t},
         {"p_lo", g.p_lo}, {"p_hi", g.p_hi}});
    double worst = 0.0;
    for (Family f : fams) {
        std::vector<SparseVector> vs;
        double tail = 0.0;
        for (int r = -g.rs; r <= g.rs; ++r)
            for (int s = -g.rs; s <= g.rs; ++s)
                for (int t = -g.t; t <= g.t; ++t)
                    for (int p = g.p_lo; p <= g.p_hi; ++p)
                        for (int sg : {1, -1}) {
                            SignedIndex pi{p, sg};
                            if (f != Family::Minus && sg < 0) continue;
                            if (f == Family::Plus && p < 0) continue;
                            if (f == Family::Minus && !in_Iminus(pi)) continue;
                            vs.push_back(xi_vector(f, r, s, pi, t, win, ctx));
                            tail = std::max(tail, vs.back().tail_bound);
                        }
        double off = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            diag = std::max(diag, std::abs(vs[i].norm2() - 1.0));
            for (std::size_t j = i + 1; j < vs.size(); ++j) off = std::max(off, std::abs(inner(vs[i], vs[j])));
        }
        std::string key = to_string(f);
        rep.details[key] = {{"vectors", vs.size()}, {"max_offdiag", off}, {"max_diag_dev", diag}, {"max_tail", tail}};
        if (f == Family::Minus)
            rep.details["minus_diagonal_is_unit"] = diag <= tol;
        worst = std::max({worst, off, diag});
    }
    rep.metric = worst;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// ||coaction(W) xi - (± q^{2r}) xi|| over the admissible labels.
inline CheckReport verify_eigen(int r_max, int p_abs, const std::vector<int>& ts, const QContext& ctx, double tol = 1e-9) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_eigen", tol, {{"q", ctx.q()}, {"r_max", r_max}, {"p_abs", p_abs}, {"t", ts}});
    LinOp AW = ops::coaction(ops::SphereGen::W, ctx), Ga = ops::G_adj(ctx);
    double m = 0.0;
    int used = 0, excluded = 0;
    for (int p = -p_abs; p <= p_abs; ++p)
        for (int r = 0; r <= r_max; ++r)
            for (int sg : {1, -1})
                for (int t : ts) {
                    if (sg < 0 && r + p < 0) {
                        ++excluded;
                        continue;
                    }
                    long M = -p - r - 1, l = t - 2 * r - M - 1;
                    SparseVector xi = Ga(BasisIndex{ops::L(M, sg), ops::L(l), ops::L(r)});
                    SparseVector lam = xi;
                    lam *= sg * std::pow(ctx.q(), 2 * r);
                    SparseVector d = AW(xi);
                    d.axpy(-1.0, lam);
                    m = std::max(m, d.norm());
                    ++used;
                }
    rep.metric = m;
    rep.details = {{"checked", used}, {"excluded_inadmissible", excluded}};
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// Partial sum of |f_k^{(p)}(-1)|^2 for p < 0; growth beyond the threshold shows -1 is
// not an eigenvalue of the block.
inline CheckReport verify_no_negative_eigen(long p, long k_max, const QContext& ctx, double threshold = 1e6) {
    detail::Stopwatch sw;
    if (p >= 0) throw Error(ErrorCode::InvalidIndex, "the divergence check needs p < 0");
    CheckReport rep = detail::start_report("verify_no_negative_eigen", threshold, {{"q", ctx.q()}, {"p", p}, {"k_max", k_max}});
    rep.relation = "ge";
    double log10_sum = detail::with_digits_for(k_max, ctx.q(), [&](auto tag) {
        using R = decltype(tag);
        R s(0), x(-1);
        for (long k = 0; k <= k_max; ++k) {
            R f = detail::eta_coeff<R>(p, k, x, ctx.q());
            s += f * f;
        }
        return num::to_d(R(log10(s)));
    });
    rep.metric = log10_sum > 308.0 ? std::numeric_limits<double>::max() : std::pow(10.0, log10_sum);
    rep.details = {{"log10_partial_sum", log10_sum}, {"saturated", log10_sum > 308.0}};
    rep.decide();
    if (!rep.pass) rep.notes = "inconclusive: partial sum below threshold";
    rep.runtime_ms = sw.ms();
    return rep;
}

// Closed-form eigenvector norms against direct sums, plus the constants relating the
// coaction of Y^* on neighbouring eigenvectors.
inline CheckReport verify_eta_norms(int r_max, int p_abs, const QContext& ctx, double tol = 1e-9) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_eta_norms", tol, {{"q", ctx.q()}, {"r_max", r_max}, {"p_abs", p_abs}});
    const double q = ctx.q();
    double norm_dev = 0.0, y_dev = 0.0;
    json branches = json::object();
    int nb[3] = {0, 0, 0};
    double bdev[3] = {0, 0, 0};
    LinOp Ys = ops::coaction(ops::SphereGen::Ystar, ctx);
    for (int p = -p_abs; p <= p_abs; ++p)
        for (int r = 0; r <= r_max; ++r)
            for (int sg : {1, -1}) {
                if (sg < 0 && r + p < 0) continue;
                int b = p >= 0 ? 0 : (r + p >= 0 ? 1 : 2);
                double direct = detail::eta_norm2_direct(p, r, sg, q);
                double closed = detail::eta_norm2_closed(p, r, sg, q);
                double d = std::abs(direct - closed) / std::abs(closed);
                norm_dev = std::max(norm_dev, d);
                ++nb[b];
                bdev[b] = std::max(bdev[b], d);

                // Y^* maps eta_r^{(t,p)} to a multiple of eta_{r+1}^{(t+2,p-1)}
                if (r < r_max) {
                    const long len = 30, t = 1;
                    SparseVector lhs = Ys(detail::eta_vector(t, p, r, sg, q, len));
                    double c = p > 0 ? -q * std::sqrt(1.0 - std::pow(q, 4 * p))
                                     : -(1.0 + sg * std::pow(q, 2 * r + 2)) / std::sqrt(1.0 - std::pow(q, -2 * p + 2)) *
                                           std::pow(q, -p + 1);
                    SparseVector rhs = detail::eta_vector(t + 2, p - 1, r + 1, sg, q, len);
                    rhs *= c;
                    double scale = std::max(rhs.max_abs(), 1e-300), dv = 0.0;
                    for (long i = 0; i + 4 < len; ++i) {
                        BasisIndex k = detail::block_index(t + 2, p - 1, i);
                        dv = std::max(dv, std::abs(lhs.at(k) - rhs.at(k)) / scale);
                    }
                    y_dev = std::max(y_dev, dv);
                }
            }
    const char* names[] = {"p_nonneg", "r_plus_p_nonneg", "r_plus_p_neg"};
    for (int b = 0; b < 3; ++b) branches[names[b]] = {{"cases", nb[b]}, {"max_rel_dev", bdev[b]}};
    rep.details = {{"branches", branches}, {"norm_max_rel_dev", norm_dev}, {"ystar_constant_max_rel_dev", y_dev}};
    rep.metric = std::max(norm_dev, y_dev);
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// W_mu^*(1 ⊗ x)W_mu against the comultiplication formulas of the generators.
inline CheckReport verify_implementation(const Window& win, const QContext& ctx, double tol = 1e-7, double exact_tol = 1e-12) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report(
        "verify_implementation", tol,
        {{"q", ctx.q()}, {"n_cut", win.n_cut}, {"z_lo", win.z_lo}, {"z_hi", win.z_hi}, {"interior_margin", win.interior_margin},
         {"exact_tolerance", exact_tol}});
    using ops::L;
    const double q = ctx.q();
    struct Item {
        const char* name;
        CornerLabel corner;
        LinOp lhs, rhs;
    };
    std::vector<Item> items{
        {"Delta+(a+)", {Family::Plus, Family::Plus}, ops::comult_op(ops::a_plus(ctx), {Family::Plus, Family::Plus}, ctx),
         sum(tensor(ops::a_plus(ctx), ops::a_plus(ctx)), tensor(ops::b_plus_adj(ctx), ops::b_plus(ctx)), 1.0, -q)},
        {"Delta+(b+)", {Family::Plus, Family::Plus}, ops::comult_op(ops::b_plus(ctx), {Family::Plus, Family::Plus}, ctx),
         sum(tensor(ops::b_plus(ctx), ops::a_plus(ctx)), tensor(ops::a_plus_adj(ctx), ops::b_plus(ctx)))},
        {"Delta0(a0)", {Family::Zero, Family::Zero}, ops::comult_op(ops::a_zero(), {Family::Zero, Family::Zero}, ctx),
         tensor(ops::a_zero(), ops::a_zero())},
        {"Delta0(b0) core", {Family::Zero, Family::Zero}, ops::comult_op(ops::b_zero(ctx), {Family::Zero, Family::Zero}, ctx),
         sum(tensor(ops::b_zero(ctx), ops::a_zero()), tensor(ops::a_zero_adj(), ops::b_zero(ctx)))},
    };
    double worst = 0.0;
    bool exact_ok = true;
    for (auto& it : items) {
        Signature sig = pair_signature(it.corner.nu);
        int lo = it.corner.nu == Family::Plus ? 0 : -3, hi = 4;
        double m = 0.0;
        int cols = 0;
        for (int v = lo; v <= hi; ++v)
            for (int w = lo; w <= hi; ++w)
                for (int a : {-1, 0, 2})
                    for (int b : {-2, 1}) {
                        BasisIndex col{L(v), L(a), L(w), L(b)};
                        if (!is_interior(col, sig, win)) continue;
                        m = std::max(m, detail::vec_dev(it.lhs(col), it.rhs(col)));
                        ++cols;
                    }
        if (cols == 0) throw Error(ErrorCode::WindowTooSmall, "no interior columns for the comultiplication check");
        rep.details[it.name] = {{"max_dev", m}, {"columns", cols}};
        if (std::string(it.name) == "Delta0(a0)") {
            exact_ok = m <= exact_tol;
            rep.details["Delta0(a0)_exact"] = exact_ok;
        }
        worst = std::max(worst, m);
    }
    rep.metric = worst;
    rep.decide();
    if (!exact_ok) {
        rep.pass = false;
        rep.notes = "Delta0(a0) deviates beyond the exactness tolerance";
    }
    rep.runtime_ms = sw.ms();
    return rep;
}

// Delta_{0+}(L_{0+}) computed through the multiplicative unitaries against the series
// truncated at k_cut. The deviation should equal the mass of the dropped terms.
inline CheckReport verify_L0plus_comult(const Window& win, long k_cut, const QContext& ctx, double tol = 1e-7) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report(
        "verify_L0plus_comult", tol,
        {{"q", ctx.q()}, {"k_cut", k_cut}, {"n_cut", win.n_cut}, {"z_lo", win.z_lo}, {"z_hi", win.z_hi},
         {"interior_margin", win.interior_margin}});
    using ops::L;
    LinOp D = ops::comult_op(ops::L0p(ctx), {Family::Zero, Family::Plus}, ctx);
    LinOp S = ops::L0p_series(k_cut, ctx), Sfull = ops::L0p_series(400, ctx);
    double m = 0.0, dropped = 0.0, full = 0.0;
    int cols = 0;
    Signature sig = pair_signature(Family::Plus);
    for (int v = 0; v <= 5; ++v)
        for (int w = 0; w <= 5; ++w) {
            BasisIndex col{L(v), L(0), L(w), L(1)};
            if (!is_interior(col, sig, win)) continue;
            SparseVector d = D(col), s = S(col), sf = Sfull(col);
            m = std::max(m, detail::vec_dev(d, s));
            dropped = std::max(dropped, detail::vec_dev(sf, s));
            full = std::max(full, detail::vec_dev(d, sf));
            ++cols;
        }
    if (cols == 0) throw Error(ErrorCode::WindowTooSmall, "no interior columns for the series check");
    rep.metric = m;
    rep.details = {{"dropped_series_mass", dropped}, {"deviation_untruncated", full}};
    rep.decide();
    if (!rep.pass && full <= tol)
        rep.notes = "deviation is the truncated tail of the series; the untruncated series matches";
    rep.runtime_ms = sw.ms();
    return rep;
}

// xi^-_{r,s,(p-1)+,t} and xi^-_{r,s,(-p-1)±,t+p} against their expansions through
// Gamma_N of the G blocks applied to xi^+ vectors.
inline CheckReport verify_key_identities(int p_max, const QContext& ctx, double tol = 1e-7) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_key_identities", tol, {{"q", ctx.q()}, {"p_max", p_max}});
    detail::Lat<double> lat(ctx.q());
    const double q = ctx.q();
    const int rst[][3] = {{1, 0, 1}, {0, 2, -1}, {-1, 1, 0}};
    double m1 = 0.0, m2 = 0.0;
    for (auto& x : rst) {
        const long r = x[0], s = x[1], t = x[2];
        for (long p = 0; p <= p_max; ++p) {
            double C = std::sqrt(2.0) * std::pow(q, -0.5 * p * (p - 1)) * std::sqrt(lat.poch(-1, 2, 2, -1)) /
                       (std::sqrt(lat.poch(-1, -2 * p + 2, 2, p)) * std::sqrt(lat.poch(1, 2 * p + 2, 2, -1)));
            SparseVector lhs = xi_full(Family::Minus, r, s, {static_cast<int>(p - 1), 1}, t, ctx);
            SparseVector rhs = ops::gamma_N_G(1, 0, 0, ctx)(xi_full(Family::Plus, r, s, {static_cast<int>(p), 1}, t, ctx));
            rhs *= C;
            m1 = std::max(m1, detail::vec_dev(lhs, rhs));
        }
        for (long p = 1; p <= p_max; ++p)
            for (int sg : {1, -1}) {
                double C = std::sqrt(2.0) * std::sqrt(lat.poch(-sg, 2 * p + 2, 2, -1) * lat.poch(1, 4, 4, p) /
                                                      lat.poch(1, 2, 2, -1));
                SparseVector lhs = xi_full(Family::Minus, r, s, {static_cast<int>(-p - 1), sg}, t + p, ctx);
                SparseVector rhs = ops::gamma_N_G(sg, 0, p, ctx)(xi_full(Family::Plus, r, s, {0, 1}, t, ctx));
                rhs *= C;
                m2 = std::max(m2, detail::vec_dev(lhs, rhs));
            }
    }
    rep.details = {{"first_identity_max_dev", m1}, {"second_identity_max_dev", m2}};
    rep.metric = std::max(m1, m2);
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

namespace detail {

struct CoassocResult {
    double dev = 0.0;
    double norm = 0.0;
    int columns = 0;
};

// (Delta ⊗ id)Delta(x) - (id ⊗ Delta)Delta(x) on six-leg basis columns, with
// Delta = Delta_{mu nu}.
inline CoassocResult coassoc_corner(Family mu, Family nu, const LinOp& x, const std::vector<BasisIndex>& cols,
                                    const QContext& ctx, const ScanPolicy& pol) {
    LinOp W12 = on_legs(ops::W(nu, ctx, pol), 0, 6), W23 = on_legs(ops::W(nu, ctx, pol), 2, 6),
          W13 = on_leg_pair(ops::W(nu, ctx, pol), 0, 2, 4, 2, 6);
    LinOp A12 = on_legs(ops::W_adj(mu, ctx, pol), 0, 6), A23 = on_legs(ops::W_adj(mu, ctx, pol), 2, 6),
          A13 = on_leg_pair(ops::W_adj(mu, ctx, pol), 0, 2, 4, 2, 6);
    LinOp x3 = on_legs(x, 4, 6);
    LinOp lhs = compose({A12, A23, x3, W23, W12}), rhs = compose({A23, A13, x3, W13, W23});
    CoassocResult out;
    for (const auto& c : cols) {
        SparseVector l = lhs(c), r = rhs(c);
        out.dev = std::max(out.dev, vec_dev(l, r));
        out.norm = std::max(out.norm, l.norm());
        ++out.columns;
    }
    return out;
}

}  // namespace detail

inline CheckReport verify_coassoc(const QContext& ctx, double tol = 1e-6) {
    detail::Stopwatch sw;
    ScanPolicy pol;
    pol.drop = 1e-13;
    CheckReport rep = detail::start_report("verify_coassoc", tol, {{"q", ctx.q()}, {"scan_drop", pol.drop}});
    using ops::L;
    struct Corner {
        const char* name;
        Family mu, nu;
        Leg a, b;  // x = e_{ab} ⊗ S
        std::vector<Leg> vs;
    };
    std::vector<Corner> corners{
        {"++", Family::Plus, Family::Plus, L(0), L(0), {L(0), L(1)}},
        {"-+", Family::Minus, Family::Plus, L(0, 1), L(0), {L(1)}},
        {"0+", Family::Zero, Family::Plus, L(0), L(1), {L(0), L(1)}},
        {"0-", Family::Zero, Family::Minus, L(1), L(0, 1), {L(-1, -1), L(1), L(0)}},
    };
    double worst = 0.0;
    for (const auto& c : corners) {
        std::vector<BasisIndex> cols;
        for (const Leg& v : c.vs)
            for (int w : {0, 1}) {
                Leg lw = c.nu == Family::Minus ? L(w - 1, w == 0 ? -1 : 1) : L(w);
                cols.push_back({v, L(0), lw, L(1), c.b, L(-1)});
            }
        auto res = detail::coassoc_corner(c.mu, c.nu, ops::matrix_unit(c.a, c.b, 1), cols, ctx, pol);
        rep.details[c.name] = {{"max_dev", res.dev}, {"max_norm", res.norm}, {"columns", res.columns}};
        if (res.norm == 0.0) rep.notes += std::string("corner ") + c.name + " sampled only zero columns; ";
        worst = std::max(worst, res.dev);
    }
    // the zero element
    {
        LinOp zero{2, 2, [](const BasisIndex&, cplx, SparseVector&) {}};
        auto res = detail::coassoc_corner(Family::Plus, Family::Plus, zero, {BasisIndex{L(0), L(0), L(1), L(0), L(0), L(0)}},
                                          ctx, pol);
        rep.details["zero"] = {{"max_dev", res.dev}, {"max_norm", res.norm}};
        worst = std::max(worst, res.dev);
    }
    // Delta_{0-}(x y) = Delta_{0+}(x) Delta_{+-}(y) for x: H_+ -> H_0, y: H_- -> H_+
    {
        double m = 0.0, nrm = 0.0;
        const std::pair<Leg, Leg> xs[] = {{L(0), L(0)}, {L(1), L(2)}};
        const std::pair<Leg, Leg> ys[] = {{L(0), L(0, 1)}, {L(2), L(-1, -1)}};
        for (auto& xu : xs)
            for (auto& yu : ys) {
                LinOp x = ops::matrix_unit(xu.first, xu.second, 1), y = ops::matrix_unit(yu.first, yu.second, -1);
                LinOp lhs = ops::comult_op(compose(x, y), {Family::Zero, Family::Minus}, ctx, pol);
                LinOp rhs = compose(ops::comult_op(x, {Family::Zero, Family::Plus}, ctx, pol),
                                    ops::comult_op(y, {Family::Plus, Family::Minus}, ctx, pol));
                for (const Leg& v : {L(-1, -1), L(0), L(1)})
                    for (const Leg& w : {L(-2, -1), L(0)}) {
                        BasisIndex col{v, L(0), w, L(1)};
                        SparseVector l = lhs(col), r = rhs(col);
                        m = std::max(m, detail::vec_dev(l, r));
                        nrm = std::max(nrm, l.norm());
                    }
            }
        rep.details["composition_0-"] = {{"max_dev", m}, {"max_norm", nrm}};
        worst = std::max(worst, m);
    }
    rep.metric = worst;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// Omega is a 2-cocycle for Delta_- and the coboundary of the phase map u.
inline CheckReport verify_cocycle_omega(const QContext& ctx, double tol = 1e-7) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_cocycle_omega", tol, {{"q", ctx.q()}});
    using ops::L;
    LinOp Wm = ops::W(Family::Minus, ctx), Wa = ops::W_adj(Family::Minus, ctx), Om = ops::omega_op();
    std::vector<Leg> legs{L(-2, -1), L(-1, -1), L(0), L(1)};

    // Omega^2 = 1
    double sq = 0.0;
    for (const Leg& v : legs)
        for (const Leg& w : legs) {
            BasisIndex c{v, L(0), w, L(1)};
            sq = std::max(sq, detail::vec_dev(Om(Om(c)), basis_vector(c)));
        }

    // (Omega ⊗ 1)(Delta ⊗ id)(Omega) = (1 ⊗ Omega)(id ⊗ Delta)(Omega)
    LinOp lhs = compose({on_legs(Om, 0, 6), on_legs(Wa, 0, 6), on_legs(Om, 2, 6), on_legs(Wm, 0, 6)});
    LinOp rhs = compose({on_legs(Om, 2, 6), on_legs(Wa, 2, 6), on_leg_pair(Om, 0, 2, 4, 2, 6), on_legs(Wm, 2, 6)});
    double coc = 0.0;
    for (const Leg& v : legs)
        for (const Leg& w : {L(-1, -1), L(1)})
            for (const Leg& u : {L(-1, -1), L(0)}) {
                BasisIndex c{v, L(0), w, L(1), u, L(-1)};
                coc = std::max(coc, detail::vec_dev(lhs(c), rhs(c)));
            }

    // Omega = (u* ⊗ u*) Delta_-(u)
    LinOp cob = compose({tensor(ops::u_op(true), ops::u_op(true)), Wa, on_legs(ops::u_op(), 2, 4), Wm});
    double cb = 0.0;
    for (const Leg& v : legs)
        for (const Leg& w : legs) {
            BasisIndex c{v, L(0), w, L(1)};
            cb = std::max(cb, detail::vec_dev(cob(c), Om(c)));
        }
    rep.details = {{"omega_squared_dev", sq}, {"cocycle_dev", coc}, {"coboundary_dev", cb}};
    rep.metric = std::max({sq, coc, cb});
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// e is a self-adjoint grouplike unitary and G^*(e ⊗ 1)G is the sign of the coaction of W.
inline CheckReport verify_grouplike(const QContext& ctx, double tol = 1e-7, double etilde_tol = 1e-8) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_grouplike", tol, {{"q", ctx.q()}, {"etilde_tolerance", etilde_tol}});
    using ops::L;
    LinOp e = ops::e_op();
    std::vector<Leg> legs{L(-2, -1), L(-1, -1), L(-1), L(0), L(2)};
    double triv = 0.0, gl = 0.0;
    LinOp De = ops::comult_op(e, {Family::Minus, Family::Minus}, ctx), ee = tensor(e, e);
    for (const Leg& v : legs) {
        BasisIndex c1{v, L(3)};
        triv = std::max(triv, detail::vec_dev(e(e(c1)), basis_vector(c1)));
        for (const Leg& w : legs) {
            BasisIndex c{v, L(0), w, L(1)};
            gl = std::max(gl, detail::vec_dev(De(c), ee(c)));
        }
    }
    LinOp lhs = compose({ops::G_adj(ctx), on_legs(e, 0, 3), ops::G(ctx)});
    LinOp rhs = block_function_op(BlockFunction::Sign, ctx);
    double et = 0.0;
    for (int n = 0; n <= 3; ++n)
        for (int k = 0; k <= 3; ++k) {
            BasisIndex c{L(n), L(1), L(k)};
            et = std::max(et, detail::vec_dev(lhs(c), rhs(c)));
        }
    rep.details = {{"e_selfadjoint_unitary_dev", triv}, {"grouplike_dev", gl}, {"etilde_dev", et}};
    rep.metric = std::max(triv, gl);
    rep.decide();
    if (et > etilde_tol) {
        rep.pass = false;
        rep.notes = "G^*(e ⊗ 1)G deviates from the sign of the coaction of W";
    }
    rep.runtime_ms = sw.ms();
    return rep;
}

// G^*G = 1 and GG^* = 1 on interior columns.
inline CheckReport verify_G_unitary(int n_max, const QContext& ctx, double tol = 1e-8) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_G_unitary", tol, {{"q", ctx.q()}, {"n_max", n_max}});
    using ops::L;
    LinOp G = ops::G(ctx), Ga = ops::G_adj(ctx);
    double m1 = 0.0, m2 = 0.0;
    for (int n = 0; n <= n_max; ++n)
        for (int s = 0; s <= n_max; ++s) {
            BasisIndex c{L(n), L(0), L(s)};
            m1 = std::max(m1, detail::vec_dev(Ga(G(c)), basis_vector(c)));
        }
    for (int M = -n_max; M < n_max; ++M)
        for (int sg : {1, -1})
            for (int r = 0; r < n_max; ++r) {
                if (sg < 0 && M >= 0) continue;
                BasisIndex c{L(M, sg), L(0), L(r)};
                m2 = std::max(m2, detail::vec_dev(G(Ga(c)), basis_vector(c)));
            }
    rep.details = {{"GstarG_dev", m1}, {"GGstar_dev", m2}};
    rep.metric = std::max(m1, m2);
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// G^*(1 ⊗ e_rs)G = c_r c_s coaction((YW)^*)^r P0 coaction(YW)^s with P0 the projection onto
// the eigenvalues ±1 and c_r = q^{-r(r+1)} (q^4;q^4)_r^{-1/2}.
inline CheckReport verify_G_alpha(int rs_max, const QContext& ctx, double tol = 1e-8) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_G_alpha", tol, {{"q", ctx.q()}, {"rs_max", rs_max}});
    using ops::L;
    LinOp G = ops::G(ctx), Ga = ops::G_adj(ctx);
    LinOp AW = ops::coaction(ops::SphereGen::W, ctx), AY = ops::coaction(ops::SphereGen::Y, ctx),
          AYs = ops::coaction(ops::SphereGen::Ystar, ctx);
    LinOp YW = compose(AY, AW), YWs = compose(AW, AYs);
    LinOp P0 = block_function_op(BlockFunction::UnitProjection, ctx);
    detail::Lat<double> lat(ctx.q());
    auto cr = [&](long r) { return std::pow(ctx.q(), -double(r * (r + 1))) / std::sqrt(lat.poch(1, 4, 4, r)); };
    double m = 0.0;
    for (long r = 0; r <= rs_max; ++r)
        for (long s = 0; s <= rs_max; ++s) {
            LinOp ers{1, 1, [r, s](const BasisIndex& in, cplx c, SparseVector& out) {
                          if (in[0].v == s) out.add({L(r)}, c);
                      }};
            LinOp lhs = compose({Ga, on_legs(ers, 2, 3), G});
            LinOp rhs = P0;
            for (long i = 0; i < s; ++i) rhs = compose(rhs, YW);
            for (long i = 0; i < r; ++i) rhs = compose(YWs, rhs);
            rhs = scaled(rhs, cr(r) * cr(s));
            double mm = 0.0;
            for (int n = 0; n <= 3; ++n)
                for (int k = 0; k <= 3; ++k) {
                    BasisIndex c{L(n), L(0), L(k)};
                    mm = std::max(mm, detail::vec_dev(lhs(c), rhs(c)));
                }
            rep.details["e_" + std::to_string(r) + std::to_string(s)] = mm;
            m = std::max(m, mm);
        }
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// G^{(±)} coaction(x) = ±(1 ⊗ x^{(+)}) G^{(±)} for x in {W, Y}.
inline CheckReport verify_intertwining(const QContext& ctx, double tol = 1e-8) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_intertwining", tol, {{"q", ctx.q()}});
    using ops::L;
    LinOp G = ops::G(ctx);
    double m = 0.0;
    for (int sg : {1, -1}) {
        LinOp Pg = compose(on_legs(ops::sign_projection(sg), 0, 3), G);
        std::pair<ops::SphereGen, LinOp> gens[] = {{ops::SphereGen::W, ops::sphere_W(1, ctx)},
                                                   {ops::SphereGen::Y, ops::sphere_Y(1, ctx)}};
        for (auto& [x, xp] : gens) {
            LinOp lhs = compose(Pg, ops::coaction(x, ctx));
            LinOp rhs = scaled(compose(on_legs(xp, 2, 3), Pg), double(sg));
            for (int n = 0; n <= 3; ++n)
                for (int k = 0; k <= 3; ++k) {
                    BasisIndex c{L(n), L(-1), L(k)};
                    m = std::max(m, detail::vec_dev(lhs(c), rhs(c)));
                }
        }
    }
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// Factored G blocks against the matrix elements g.
inline CheckReport verify_factored_blocks(int rs_max, const Window& win, const QContext& ctx, double tol = 1e-10) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report(
        "verify_factored_blocks", tol,
        {{"q", ctx.q()}, {"rs_max", rs_max}, {"n_cut", win.n_cut}, {"z_lo", win.z_lo}, {"z_hi", win.z_hi}});
    using ops::L;
    double m = 0.0;
    const int n_hi = std::min(12, win.n_cut);
    for (int sg : {1, -1})
        for (int r = 0; r <= rs_max; ++r)
            for (int s = 0; s <= rs_max; ++s) {
                auto B = g_block_factored(sg, r, s, win, ctx);
                for (int n = 0; n <= n_hi; ++n) {
                    GElement g = g_elem(sg, r, s, n, 0, ctx);
                    SparseVector col = B.column(BasisIndex{L(n), L(0)});
                    double d = std::abs(col.at(g.target) - g.coef);
                    col.set(g.target, 0.0);
                    m = std::max({m, d, col.max_abs()});
                }
            }
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

inline CheckReport verify_psi_factorization(int count, std::uint64_t seed, const QContext& ctx, double tol = 1e-12) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_psi_factorization", tol, {{"q", ctx.q()}, {"samples", count}, {"seed", seed}});
    std::mt19937_64 gen(detail::stream_seed(seed, rep.check_id));
    std::uniform_real_distribution<double> rad(0.0, 1.5), ang(0.0, 2.0 * M_PI);
    const double base = ctx.q();
    double m = 0.0;
    int done = 0;
    while (done < count) {
        cplx a = std::polar(rad(gen), ang(gen)), b = std::polar(rad(gen), ang(gen)), z = std::polar(rad(gen), ang(gen));
        bool near = false;
        for (int k = 0; k < 200 && !near; ++k) near = std::abs(b - std::pow(base, -k)) < 1e-3;
        if (near) continue;
        cplx ps = psi(a, b, base, z, ctx);
        HyperSeriesSpec s;
        s.numerators = {a};
        s.denominators = {b};
        s.base = base;
        s.z = z;
        cplx f = qpochhammer(b, base, std::nullopt, ctx) * basic_hypergeometric(s, ctx);
        m = std::max(m, std::abs(ps - f) / std::max(std::abs(ps), 1e-300));
        ++done;
    }
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

inline CheckReport verify_pplus_dual(int max_index, const std::vector<double>& qs, double tol = 1e-10) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_pplus_dual", tol, {{"q_values", qs}, {"max_index", max_index}});
    double m = 0.0;
    for (double q : qs) {
        QContext c(q);
        for (int p = 0; p <= max_index; ++p)
            for (int v = 0; v <= max_index; ++v)
                for (int w = 0; w <= max_index; ++w) m = std::max(m, std::abs(p_plus(p, v, w, c) - p_plus_alt(p, v, w, c)));
    }
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

inline CheckReport verify_wall_bridge(int pw_max, int t_max, const QContext& ctx, double tol = 1e-10) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_wall_bridge", tol, {{"q", ctx.q()}, {"pw_max", pw_max}, {"t_max", t_max}});
    double m = 0.0;
    for (int p = 0; p <= pw_max; ++p)
        for (int w = 0; w <= pw_max; ++w)
            for (int t = 0; t <= t_max; ++t)
                m = std::max(m, std::abs(p_plus(p, w + t, w, ctx) - num::neg1pow(p) * wall_polynomial(w, p, t, ctx)));
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// P^0(p,v,w) = (-q)^{p-w} J_{v-w}(q^{p-w}; q^2)
inline CheckReport verify_qbessel(int range, const QContext& ctx, double tol = 1e-12) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_qbessel", tol, {{"q", ctx.q()}, {"range", range}});
    const double q = ctx.q();
    double m = 0.0;
    for (int p = -range; p <= range; ++p)
        for (int v = -range; v <= range; ++v)
            for (int w = -range; w <= range; ++w) {
                double rhs = num::neg1pow(p - w) * std::pow(q, p - w) * q_bessel_lattice(v - w, p - w, q, ctx);
                m = std::max(m, std::abs(p_zero(p, v, w, ctx) - rhs) / std::max(1.0, std::abs(rhs)));
            }
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

inline CheckReport verify_g_alt(int rs_max, int n_max, const QContext& ctx, double tol = 1e-12) {
    detail::Stopwatch sw;
    CheckReport rep = detail::start_report("verify_g_alt", tol, {{"q", ctx.q()}, {"rs_max", rs_max}, {"n_max", n_max}});
    double m = 0.0;
    for (int sg : {1, -1})
        for (int r = 0; r <= rs_max; ++r)
            for (int s = 0; s <= rs_max; ++s)
                for (int n = 0; n <= n_max; ++n)
                    m = std::max(m, std::abs(g_elem(sg, r, s, n, 0, ctx).coef - g_elem_alt(sg, r, s, n, 0, ctx).coef));
    rep.metric = m;
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

// ---- suite level -------------------------------------------------------------------

namespace detail {

inline CheckReport summation_suite(int which, const CheckConfig& cfg, double tol) {
    Stopwatch sw;
    const std::string id = "verify_sum" + std::to_string(which);
    QContext ctx(cfg.q);
    const int count = 50, p_max = 6;
    auto cases = sample_summation_cases(which, count, p_max, cfg.q, stream_seed(cfg.seed, id));
    CheckReport rep = start_report(id, tol, cfg.base_params());
    rep.params["cases"] = count;
    rep.params["p_max"] = p_max;
    double m = 0.0;
    json worst;
    for (const auto& c : cases) {
        CheckReport one = verify_sum_case(which, c, ctx, tol);
        if (one.metric >= m) {
            m = one.metric;
            worst = one.params;
        }
    }
    rep.metric = m;
    rep.details = {{"worst_case", worst}};
    rep.decide();
    rep.runtime_ms = sw.ms();
    return rep;
}

inline CheckReport with_config(CheckReport r, const CheckConfig& cfg) {
    json p = cfg.base_params();
    for (auto it = r.params.begin(); it != r.params.end(); ++it) p[it.key()] = it.value();
    r.params = p;
    return r;
}

}  // namespace detail

struct CheckInfo {
    std::string id;
    std::string description;
    double tolerance;
    std::function<CheckReport(const CheckConfig&, double tol)> run;
};

inline const std::vector<CheckInfo>& check_registry() {
    static const std::vector<CheckInfo> reg = [] {
        std::vector<CheckInfo> v;
        auto ctx_of = [](const CheckConfig& c) { return QContext(c.q); };
        v.push_back({"verify_L0plus_comult", "Delta_{0+}(L_{0+}) against its series truncated at k_cut = 12", 1e-7,
                     [=](const CheckConfig& c, double t) {
                         return detail::with_config(verify_L0plus_comult(c.window, 12, ctx_of(c), t), c);
                     }});
        v.push_back({"verify_G_alpha", "G^*(1 ⊗ e_rs)G equals the coaction image of the matrix unit e_rs, r,s <= 2", 1e-8,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_G_alpha(2, ctx_of(c), t), c); }});
        v.push_back({"verify_G_unitary", "the implementing unitary G is isometric and co-isometric", 1e-8,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_G_unitary(4, ctx_of(c), t), c); }});
        v.push_back({"verify_coassoc", "corner coassociativity for ++, -+, 0+, 0- and the 0- composition rule", 1e-6,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_coassoc(ctx_of(c), t), c); }});
        v.push_back({"verify_cocycle_omega", "Omega is a unitary 2-cocycle for Delta_- and a coboundary", 1e-7,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_cocycle_omega(ctx_of(c), t), c); }});
        v.push_back({"verify_eigen", "eigenvector residuals of the coaction of W", 1e-9, [=](const CheckConfig& c, double t) {
                         return detail::with_config(verify_eigen(3, 3, {-2, 0, 3}, ctx_of(c), t), c);
                     }});
        v.push_back({"verify_eta_norms", "closed-form eigenvector norms and Y^* transfer constants", 1e-9,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_eta_norms(3, 3, ctx_of(c), t), c); }});
        v.push_back({"verify_factored_blocks", "G blocks from the linking-operator factorization, r,s <= 4", 1e-10,
                     [=](const CheckConfig& c, double t) {
                         return detail::with_config(verify_factored_blocks(4, c.window, ctx_of(c), t), c);
                     }});
        v.push_back({"verify_g_alt", "both displays of the G matrix elements agree", 1e-12,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_g_alt(5, 12, ctx_of(c), t), c); }});
        v.push_back({"verify_gram", "orthonormality of the xi vectors for families +, 0, -", 1e-8, [=](const CheckConfig& c, double t) {
                         Window w{30, -30, 30, c.window.interior_margin};
                         return detail::with_config(
                             verify_gram({Family::Plus, Family::Zero, Family::Minus}, GramRanges{}, w, ctx_of(c), t), c);
                     }});
        v.push_back({"verify_grouplike", "e is a self-adjoint grouplike unitary implementing the sign of the coaction of W", 1e-7,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_grouplike(ctx_of(c), t), c); }});
        v.push_back({"verify_implementation", "W_mu^*(1 ⊗ x)W_mu reproduces the comultiplication of the generators", 1e-7,
                     [=](const CheckConfig& c, double t) {
                         return detail::with_config(verify_implementation(c.window, ctx_of(c), t), c);
                     }});
        v.push_back({"verify_intertwining", "G intertwines the coaction with the sphere generators", 1e-8,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_intertwining(ctx_of(c), t), c); }});
        v.push_back({"verify_key_identities", "xi^- vectors as Gamma_N(G) expansions of xi^+ vectors, p <= 3", 1e-7,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_key_identities(3, ctx_of(c), t), c); }});
        v.push_back({"verify_no_negative_eigen", "no eigenvector at -1 for p in {-1,-2,-3}: partial sums exceed 1e6", 1e6,
                     [=](const CheckConfig& c, double t) {
                         detail::Stopwatch sw;
                         CheckReport agg = detail::start_report("verify_no_negative_eigen", t, c.base_params());
                         agg.relation = "ge";
                         agg.params["k_max"] = 40;
                         agg.params["p_values"] = {-1, -2, -3};
                         double m = std::numeric_limits<double>::max();
                         for (long p : {-1L, -2L, -3L}) {
                             CheckReport r = verify_no_negative_eigen(p, 40, ctx_of(c), t);
                             agg.details["p=" + std::to_string(p)] = r.details;
                             m = std::min(m, r.metric);
                         }
                         agg.metric = m;
                         agg.decide();
                         agg.runtime_ms = sw.ms();
                         return agg;
                     }});
        v.push_back({"verify_pplus_dual", "both displays of P+ agree for p,v,w <= 12 at q in {0.3, 0.5, 0.7}", 1e-10,
                     [=](const CheckConfig& c, double t) {
                         std::vector<double> qs{0.3, 0.5, 0.7};
                         if (std::find(qs.begin(), qs.end(), c.q) == qs.end()) qs.push_back(c.q);
                         return detail::with_config(verify_pplus_dual(12, qs, t), c);
                     }});
        v.push_back({"verify_psi_factorization", "Psi equals (b;q)_inf times 1phi1 on 200 random samples", 1e-12,
                     [=](const CheckConfig& c, double t) {
                         return detail::with_config(verify_psi_factorization(200, c.seed, ctx_of(c), t), c);
                     }});
        v.push_back({"verify_qbessel", "P0 through the 1phi1 q-Bessel function", 1e-12,
                     [=](const CheckConfig& c, double t) { return detail::with_config(verify_qbessel(6, ctx_of(c), t), c); }});
        for (int k = 1; k <= 3; ++k)
            v.push_back({"verify_sum" + std::to_string(k),
                         std::string("summation identity ") + std::to_string(k) + " on 50 random complex cases, p <= 6", 1e-9,
                         [k](const CheckConfig& c, double t) { return detail::summation_suite(k, c, t); }});
        v.push_back({"verify_wall_bridge", "P+ through the normalized Wall polynomial", 1e-10, [=](const CheckConfig& c, double t) {
                         return detail::with_config(verify_wall_bridge(8, 6, ctx_of(c), t), c);
                     }});
        std::sort(v.begin(), v.end(), [](const CheckInfo& a, const CheckInfo& b) { return a.id < b.id; });
        return v;
    }();
    return reg;
}

inline const CheckInfo* find_check(const std::string& id) {
    for (const auto& c : check_registry())
        if (c.id == id) return &c;
    return nullptr;
}

// Runs one registered check; library errors become a failed report.
inline CheckReport run_check(const std::string& id, const CheckConfig& cfg) {
    const CheckInfo* info = find_check(id);
    if (!info) throw Error(ErrorCode::UsageError, "unknown check id: " + id);
    const double tol = cfg.tolerance_for(id, info->tolerance);
    detail::Stopwatch sw;
    try {
        CheckReport r = info->run(cfg, tol);
        r.check_id = id;
        return r;
    } catch (const Error& e) {
        CheckReport r = detail::start_report(id, tol, cfg.base_params());
        r.metric = std::numeric_limits<double>::quiet_NaN();
        r.pass = false;
        r.notes = std::string("error ") + to_string(e.code()) + ": " + e.what();
        r.runtime_ms = sw.ms();
        return r;
    }
}

// Every identity family that is implemented, with the checks that exercise it.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& coverage_manifest() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> m{
        {"Psi function and its 1phi1 factorization", {"verify_psi_factorization", "verify_sum1", "verify_sum2", "verify_sum3"}},
        {"SU_q(2) basis, both P+ displays", {"verify_gram", "verify_pplus_dual"}},
        {"E_q(2) basis and P0", {"verify_gram", "verify_qbessel"}},
        {"SU_q(1,1) basis and P-", {"verify_gram", "verify_cocycle_omega"}},
        {"comultiplication of the SU_q(2) and E_q(2) generators", {"verify_implementation"}},
        {"implementing unitary G and alpha on matrix units", {"verify_G_unitary", "verify_G_alpha"}},
        {"grouplike unitary e and the sign of the coaction", {"verify_grouplike"}},
        {"Gamma_N expansions of the G blocks", {"verify_key_identities"}},
        {"equatorial sphere generators and their coaction", {"verify_intertwining", "verify_eigen"}},
        {"spectral decomposition of the coaction of W", {"verify_eigen", "verify_G_unitary"}},
        {"G matrix elements, both displays", {"verify_g_alt", "verify_factored_blocks"}},
        {"K polynomials and factored G blocks", {"verify_factored_blocks"}},
        {"xi^- through G expansions of xi^+", {"verify_key_identities"}},
        {"Delta_0(a_0) and Delta_{0+}(L_{0+})", {"verify_implementation", "verify_L0plus_comult"}},
        {"corner coassociativity", {"verify_coassoc"}},
        {"normalized Wall polynomial", {"verify_wall_bridge"}},
        {"q-Bessel form of P0", {"verify_qbessel"}},
        {"Omega cocycle and coboundary", {"verify_cocycle_omega"}},
        {"Jacobi blocks and big q-Laguerre eigenvectors", {"verify_eigen", "verify_eta_norms"}},
        {"eigenvector norm formulas and Y^* transfer", {"verify_eta_norms"}},
        {"no eigenvector at -1 for p < 0", {"verify_no_negative_eigen"}},
        {"summation identities for Psi", {"verify_sum1", "verify_sum2", "verify_sum3"}},
    };
    return m;
}

}  // namespace qlink
