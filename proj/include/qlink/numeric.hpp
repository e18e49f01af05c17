#pragma once
// Scalar plumbing shared by every series evaluation: multiprecision types, a small
// complex type that works over any real backend, compensated accumulation,
// q-Pochhammer products, generic basic hypergeometric and Psi series, and the
// precision-escalation driver.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "qlink/error.hpp"

namespace qlink {

namespace bmp = boost::multiprecision;
using mp50 = bmp::number<bmp::mpfr_float_backend<50>, bmp::et_off>;
using mp120 = bmp::number<bmp::mpfr_float_backend<120>, bmp::et_off>;
using mp300 = bmp::number<bmp::mpfr_float_backend<300>, bmp::et_off>;
using mp800 = bmp::number<bmp::mpfr_float_backend<800>, bmp::et_off>;
using mp1600 = bmp::number<bmp::mpfr_float_backend<1600>, bmp::et_off>;
using mp3200 = bmp::number<bmp::mpfr_float_backend<3200>, bmp::et_off>;

using cplx = std::complex<double>;

namespace num {

template <class R>
inline R eps() {
    return std::numeric_limits<R>::epsilon();
}
template <class R>
inline double to_d(const R& x) {
    return static_cast<double>(x);
}
template <class R>
inline bool finite(const R& x) {
    return (boost::math::isfinite)(x);
}
template <class R>
inline R rabs(const R& x) {
    using std::abs;
    return abs(x);
}
template <class R>
inline R rsqrt(const R& x) {
    using std::sqrt;
    return sqrt(x);
}
template <class R>
inline R rpow(const R& x, long e) {
    using std::pow;
    return pow(x, static_cast<int>(e));
}

// Minimal complex number over an arbitrary real backend (std::complex is not
// specified for multiprecision types).
template <class R>
struct Cx {
    R re{0};
    R im{0};
    Cx() = default;
    Cx(const R& r) : re(r), im(0) {}  // NOLINT implicit on purpose
    Cx(const R& r, const R& i) : re(r), im(i) {}
    template <class D, std::enable_if_t<std::is_arithmetic_v<D> && !std::is_same_v<D, R>, int> = 0>
    Cx(D r) : re(R(r)), im(0) {}  // NOLINT

    Cx& operator+=(const Cx& o) { re += o.re; im += o.im; return *this; }
    Cx& operator-=(const Cx& o) { re -= o.re; im -= o.im; return *this; }
    Cx& operator*=(const Cx& o) {
        R r = re * o.re - im * o.im;
        im = re * o.im + im * o.re;
        re = r;
        return *this;
    }
    Cx& operator/=(const Cx& o) {
        // Smith's algorithm
        if (rabs(o.re) >= rabs(o.im)) {
            R t = o.im / o.re, d = o.re + o.im * t;
            R r = (re + im * t) / d;
            im = (im - re * t) / d;
            re = r;
        } else {
            R t = o.re / o.im, d = o.re * t + o.im;
            R r = (re * t + im) / d;
            im = (im * t - re) / d;
            re = r;
        }
        return *this;
    }
    friend Cx operator+(Cx a, const Cx& b) { return a += b; }
    friend Cx operator-(Cx a, const Cx& b) { return a -= b; }
    friend Cx operator*(Cx a, const Cx& b) { return a *= b; }
    friend Cx operator/(Cx a, const Cx& b) { return a /= b; }
    friend Cx operator-(const Cx& a) { return Cx(-a.re, -a.im); }
    friend bool operator==(const Cx& a, const Cx& b) { return a.re == b.re && a.im == b.im; }
};

template <class T>
struct real_of {
    using type = T;
};
template <class R>
struct real_of<Cx<R>> {
    using type = R;
};
template <class T>
using real_t = typename real_of<T>::type;

template <class T>
inline constexpr bool is_cx = !std::is_same_v<T, real_t<T>>;

template <class R>
inline R absv(const R& x) {
    return rabs(x);
}
template <class R>
inline R absv(const Cx<R>& z) {
    R a = rabs(z.re), b = rabs(z.im);
    if (a < b) std::swap(a, b);
    if (a == 0) return a;
    R r = b / a;
    return a * rsqrt(R(1) + r * r);
}
template <class R>
inline bool finite_v(const R& x) {
    return finite(x);
}
template <class R>
inline bool finite_v(const Cx<R>& z) {
    return finite(z.re) && finite(z.im);
}
template <class R>
inline Cx<R> conjv(const Cx<R>& z) {
    return Cx<R>(z.re, -z.im);
}
template <class R>
inline R conjv(const R& x) {
    return x;
}

template <class T>
inline T ipow(T x, long e) {
    if (e < 0) return T(1) / ipow(x, -e);
    T r(1);
    while (e) {
        if (e & 1) r *= x;
        x *= x;
        e >>= 1;
    }
    return r;
}

template <class R>
inline Cx<R> from_cplx(const cplx& z) {
    return Cx<R>(R(z.real()), R(z.imag()));
}
template <class R>
inline cplx to_cplx(const Cx<R>& z) {
    return cplx(to_d(z.re), to_d(z.im));
}
template <class R>
inline cplx to_cplx(const R& x) {
    return cplx(to_d(x), 0.0);
}

// Neumaier compensated summation over a real or complex scalar; also tracks the
// sum of term magnitudes used for rounding-error estimates.
template <class T>
class Accum {
    using R = real_t<T>;
    struct Part {
        R s{0}, c{0};
        void add(const R& x) {
            R t = s + x;
            if (rabs(s) >= rabs(x))
                c += (s - t) + x;
            else
                c += (x - t) + s;
            s = t;
        }
        R value() const { return s + c; }
    };
    Part re_, im_;
    R mag_{0};

public:
    void add(const T& x) {
        if constexpr (is_cx<T>) {
            re_.add(x.re);
            im_.add(x.im);
        } else {
            re_.add(x);
        }
        mag_ += absv(x);
    }
    T value() const {
        if constexpr (is_cx<T>)
            return T(re_.value(), im_.value());
        else
            return re_.value();
    }
    R mag() const { return mag_; }
};

// A factor 1 - x is declared exactly zero when x equals 1 to working precision;
// this is how base^{-N} lattice points are recognised.
template <class T>
inline bool near_one(const T& x) {
    using R = real_t<T>;
    R d = absv(T(1) - x);
    return d <= R(64) * eps<R>() * std::max(R(1), absv(x));
}

// (a;base)_n, n < 0 meaning infinity. Exact zero when a factor vanishes.
// stop: cut-off for |a base^k| in the infinite product (defaults to working precision).
template <class T, class R>
T poch(const T& a, const R& base, long n, R stop = R(-1)) {
    T prod(1);
    T x = a;
    if (n >= 0) {
        for (long k = 0; k < n; ++k) {
            if (near_one(x)) return T(0);
            prod *= T(1) - x;
            x *= T(base);
        }
        return prod;
    }
    const R one_minus = R(1) - base;
    if (stop < 0) stop = eps<R>() * one_minus / R(8);
    for (long k = 0; k < 2000000; ++k) {
        R ax = absv(x);
        if (ax < stop && ax < R(0.5)) {
            // log of the remaining tail is bounded by sum |x base^j| / (1 - |x base^j|);
            // fold its first-order part: 1 - x/(1-base)
            prod *= T(1) - x / T(one_minus);
            return prod;
        }
        if (near_one(x)) return T(0);
        prod *= T(1) - x;
        x *= T(base);
    }
    throw Error(ErrorCode::MaxTermsExceeded, "infinite q-Pochhammer product did not settle");
}

template <class T>
struct Series {
    T value;
    real_t<T> mag;  // sum of |term|, drives the rounding-error estimate
    long terms;
};

// r phi s with the standard [(-1)^n base^{n(n-1)/2}]^{1+s-r} factor.
// termination >= 0: exact finite sum over n = 0..termination.
template <class T, class R>
Series<T> phi(const std::vector<T>& as, const std::vector<T>& bs, const R& base, const T& z,
              long termination, const R& eps_term, long max_terms) {
    const int e = 1 + static_cast<int>(bs.size()) - static_cast<int>(as.size());
    T t(1);
    Accum<T> acc;
    acc.add(t);
    R bn(1);
    int small = 0;
    const long nmax = termination >= 0 ? termination : max_terms;
    for (long n = 0; n < nmax; ++n) {
        T num(1);
        bool zero = false;
        for (const T& a : as) {
            T x = a * T(bn);
            if (near_one(x)) {
                zero = true;
                break;
            }
            num *= T(1) - x;
        }
        if (zero) return {acc.value(), acc.mag(), n + 1};
        T den(1);
        for (const T& b : bs) {
            T x = b * T(bn);
            if (near_one(x))
                throw Error(ErrorCode::PoleHit, "denominator Pochhammer vanishes at index " + std::to_string(n + 1));
            den *= T(1) - x;
        }
        R bn1 = bn * base;
        den *= T(R(1) - bn1);
        T f = num / den * z;
        if (e > 0)
            for (int i = 0; i < e; ++i) f *= T(-bn);
        else if (e < 0)
            for (int i = 0; i < -e; ++i) f /= T(-bn);
        t *= f;
        // overflow at this precision: hand a non-finite value to the caller's escalation
        if (!finite_v(t)) return {t, R(0), n + 2};
        acc.add(t);
        bn = bn1;
        if (termination < 0) {
            R at = absv(t);
            R ref = std::max(absv(acc.value()), acc.mag() * eps<R>());
            if (at <= eps_term * ref)
                ++small;
            else
                small = 0;
            if (small >= 3) return {acc.value(), acc.mag(), n + 2};
        }
    }
    if (termination >= 0) return {acc.value(), acc.mag(), nmax + 1};
    throw Error(ErrorCode::MaxTermsExceeded, "series did not converge within max_terms");
}

// Psi(a;b|base,z) = sum (a;base)_n (b base^n;base)_inf / (base;base)_n (-1)^n base^{n(n-1)/2} z^n
template <class T, class R>
Series<T> psi(const T& a, const T& b, const R& base, const T& z, const R& eps_term, long max_terms) {
    // (b base^n;base)_inf vanishes for n <= K when b base^K == 1
    long n0 = 0;
    {
        T x = b;
        for (long k = 0; k < 1000000 && absv(x) >= R(0.5); ++k) {
            if (near_one(x)) {
                n0 = k + 1;
                break;
            }
            x *= T(base);
        }
    }
    T pa = poch(a, base, n0);
    if (pa == T(0)) return {T(0), R(0), 0};
    T bshift = b * T(rpow(base, n0));
    T pb = poch(bshift, base, -1);
    R pq = poch(base, base, n0);
    T t = pa * pb / T(pq) * T(rpow(base, n0 * (n0 - 1) / 2)) * ipow(z, n0);
    if (n0 & 1) t = -t;
    Accum<T> acc;
    acc.add(t);
    R bn = rpow(base, n0);
    int small = 0;
    for (long n = n0; n < n0 + max_terms; ++n) {
        T x = a * T(bn);
        if (near_one(x)) return {acc.value(), acc.mag(), n - n0 + 1};
        T den = T(R(1) - bn * base) * (T(1) - b * T(bn));
        t *= (T(1) - x) / den * T(-bn) * z;
        if (!finite_v(t)) return {t, R(0), n - n0 + 2};
        acc.add(t);
        bn *= base;
        R at = absv(t);
        R ref = std::max(absv(acc.value()), acc.mag() * eps<R>());
        if (at <= eps_term * ref)
            ++small;
        else
            small = 0;
        if (small >= 3) return {acc.value(), acc.mag(), n - n0 + 2};
    }
    throw Error(ErrorCode::MaxTermsExceeded, "Psi series did not converge within max_terms");
}

// Value with an absolute error estimate.
template <class T>
struct Val {
    T v;
    real_t<T> err;
};

template <class T>
inline real_t<T> series_err(const Series<T>& s) {
    using R = real_t<T>;
    return s.mag * eps<R>() * R(static_cast<double>(s.terms + 16));
}

struct Tolerance {
    double atol = 1e-17;
    double rtol = 1e-13;
};

template <class R>
inline bool acceptable(const Val<R>& r, const Tolerance& tol) {
    if (!finite_v(r.v) || !finite(r.err)) return false;
    return r.err <= R(tol.atol) + R(tol.rtol) * absv(r.v);
}

// Evaluates f at double precision and retries at growing MPFR precision until the
// error estimate meets the tolerance. f takes a tag value of the real type.
template <class F>
double escalate(F&& f, Tolerance tol = {}) {
    {
        auto r = f(double{});
        if (acceptable(r, tol)) return r.v;
    }
    {
        auto r = f(mp50{});
        if (acceptable(r, tol)) return to_d(r.v);
    }
    {
        auto r = f(mp120{});
        if (acceptable(r, tol)) return to_d(r.v);
    }
    {
        auto r = f(mp300{});
        if (acceptable(r, tol)) return to_d(r.v);
    }
    // last tier: the error bound is ~1e-790 of the term magnitudes, so a value that
    // still misses the relative tolerance is zero for every practical purpose
    auto r = f(mp800{});
    if (!finite_v(r.v)) throw Error(ErrorCode::PrecisionExhausted, "non-finite value at 800 digits");
    return to_d(r.v);
}

template <class F>
cplx escalate_c(F&& f, Tolerance tol = {}) {
    auto ok = [&](const auto& r) {
        using R = decltype(r.err);
        return finite_v(r.v) && finite(r.err) && r.err <= R(tol.atol) + R(tol.rtol) * absv(r.v);
    };
    {
        auto r = f(double{});
        if (ok(r)) return to_cplx(r.v);
    }
    {
        auto r = f(mp50{});
        if (ok(r)) return to_cplx(r.v);
    }
    {
        auto r = f(mp120{});
        if (ok(r)) return to_cplx(r.v);
    }
    auto r = f(mp300{});
    if (!finite_v(r.v)) throw Error(ErrorCode::PrecisionExhausted, "non-finite value at 300 digits");
    return to_cplx(r.v);
}

// Exact sign helpers
inline int neg1pow(long n) { return (n % 2 == 0) ? 1 : -1; }
inline int sgnpow(int s, long n) { return s > 0 ? 1 : neg1pow(n); }

}  // namespace num
}  // namespace qlink
