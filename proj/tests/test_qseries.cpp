#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "qlink/coefficients.hpp"
#include "qlink/qseries.hpp"

using namespace qlink;

namespace {

const QContext ctx05(0.5);

double poch_d(double a, double b, long n) {
    double r = 1.0;
    for (long k = 0; k < n; ++k) r *= 1.0 - a * std::pow(b, k);
    return r;
}

}  // namespace

TEST(QPochhammer, EmptyProductIsOne) { EXPECT_EQ(qpochhammer({0.7, 0}, 0.5, 0L, ctx05), cplx(1.0, 0.0)); }

TEST(QPochhammer, VanishingFirstFactorGivesExactZero) {
    EXPECT_EQ(qpochhammer({1.0, 0}, 0.5, 3L, ctx05), cplx(0.0, 0.0));
}

TEST(QPochhammer, TwoFactorProduct) { EXPECT_NEAR(qpochhammer({0.5, 0}, 0.5, 2L, ctx05).real(), 0.375, 1e-15); }

TEST(QPochhammer, InfiniteProductMatchesHighPrecisionOracle) {
    // mpmath, 40 digits
    EXPECT_NEAR(qpochhammer({0.5, 0}, 0.5, std::nullopt, ctx05).real(), 0.28878809508660242128, 1e-15);
}

TEST(QPochhammer, ComplexArgumentAgainstDirectProduct) {
    cplx a(0.3, -0.8), want(1.0, 0.0);
    for (int k = 0; k < 7; ++k) want *= 1.0 - a * std::pow(0.6, k);
    EXPECT_LT(std::abs(qpochhammer(a, 0.6, 7L, ctx05) - want), 1e-14);
}

TEST(QPochhammer, RejectsBadBaseAndLength) {
    for (double b : {0.0, 1.0, 1.5, -0.2}) {
        try {
            qpochhammer({0.5, 0}, b, 2L, ctx05);
            FAIL() << "base " << b;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidBase);
        }
    }
    EXPECT_THROW(qpochhammer({0.5, 0}, 0.5, -1L, ctx05), Error);
}

TEST(QPochhammerMulti, Examples) {
    EXPECT_EQ(qpochhammer_multi({}, 0.5, 5L, ctx05), cplx(1.0, 0.0));
    EXPECT_EQ(qpochhammer_multi({{1.0, 0}, {0.3, 0}}, 0.5, 2L, ctx05), cplx(0.0, 0.0));
    EXPECT_NEAR(qpochhammer_multi({{0.5, 0}, {0.25, 0}}, 0.5, 1L, ctx05).real(), 0.375, 1e-15);
}

TEST(BasicHypergeometric, ZeroArgumentIsOne) {
    HyperSeriesSpec s;
    s.numerators = {{0.3, 0}, {2.0, 1.0}};
    s.denominators = {{0.1, 0}};
    s.base = 0.4;
    s.z = {0, 0};
    EXPECT_EQ(basic_hypergeometric(s, ctx05), cplx(1.0, 0.0));
}

TEST(BasicHypergeometric, TerminatingTwoTermSum) {
    const double q = 0.5, q2 = q * q;
    HyperSeriesSpec s;
    s.numerators = {{1.0 / q2, 0}, {0, 0}};
    s.denominators = {{q2, 0}};
    s.base = q2;
    s.z = {q2, 0};
    s.termination = 1;
    cplx v = basic_hypergeometric(s, ctx05);
    EXPECT_NEAR(v.real(), -1.0 / 3.0, 1e-14);
    EXPECT_NEAR(v.imag(), 0.0, 1e-15);
    // limit form of q-Vandermonde at n = 1, p = 0
    double closed = std::pow(q, 2.0 * 1) / poch_d(q * q, q2, 1) * -1.0;
    EXPECT_NEAR(v.real(), closed, 1e-14);
}

TEST(BasicHypergeometric, QVandermondeLimitForm) {
    // 2phi1(q^{-2n}, 0; q^{2p+2} | q^2, q^2) = (-1)^n q^{n(n-1)} q^{2(p+1)n} / (q^{2p+2}; q^2)_n
    // Dyadic q only: the sum cancels to far below its terms, so a rounded q^{-2n} would
    // already move the answer by more than the tolerance.
    for (double q : {0.5, 0.25})
        for (long n = 0; n <= 6; ++n)
            for (long p = 0; p <= 3; ++p) {
                const double q2 = q * q;
                HyperSeriesSpec s;
                s.numerators = {{std::pow(q, -2.0 * n), 0}, {0, 0}};
                s.denominators = {{std::pow(q, 2.0 * p + 2), 0}};
                s.base = q2;
                s.z = {q2, 0};
                s.termination = n;
                double want = (n % 2 ? -1.0 : 1.0) * std::pow(q, double(n * (n - 1))) * std::pow(q, 2.0 * (p + 1) * n) /
                              poch_d(std::pow(q, 2.0 * p + 2), q2, n);
                QContext c(q);
                EXPECT_NEAR(basic_hypergeometric(s, c).real(), want, 1e-12 * std::max(1.0, std::abs(want)))
                    << "q=" << q << " n=" << n << " p=" << p;
            }
}

TEST(BasicHypergeometric, HeineLimitSum) {
    // 1phi1(a; b | q, b/a) = (b/a; q)_inf / (b; q)_inf
    for (double q : {0.3, 0.5}) {
        QContext c(q);
        const double a = 0.4, b = 0.2;
        HyperSeriesSpec s;
        s.numerators = {{a, 0}};
        s.denominators = {{b, 0}};
        s.base = q;
        s.z = {b / a, 0};
        double want = qpochhammer({b / a, 0}, q, std::nullopt, c).real() / qpochhammer({b, 0}, q, std::nullopt, c).real();
        EXPECT_NEAR(basic_hypergeometric(s, c).real(), want, 1e-13);
    }
}

TEST(BasicHypergeometric, TerminatingSeriesIsExactFiniteSum) {
    const double q = 0.5;
    HyperSeriesSpec s;
    s.numerators = {{std::pow(q, -3.0), 0}, {0.7, 0.1}};
    s.denominators = {{0.2, 0}};
    s.base = q;
    s.z = {0.9, -0.3};
    s.termination = 3;
    cplx want(0, 0), term(1, 0);
    for (int n = 0; n <= 3; ++n) {
        want += term;
        cplx a1 = s.numerators[0] * std::pow(q, n), a2 = s.numerators[1] * std::pow(q, n);
        cplx b1 = s.denominators[0] * std::pow(q, n);
        // 2phi1 has r = s + 1, so no extra power factor
        term *= (1.0 - a1) * (1.0 - a2) / ((1.0 - std::pow(q, n + 1)) * (1.0 - b1)) * s.z;
    }
    EXPECT_LT(std::abs(basic_hypergeometric(s, ctx05) - want), 1e-13);
}

TEST(Psi, ZeroArgumentGivesInfiniteProduct) {
    cplx b(0.3, 0.2);
    cplx v = psi({0.6, 0}, b, 0.5, {0, 0}, ctx05);
    EXPECT_LT(std::abs(v - qpochhammer(b, 0.5, std::nullopt, ctx05)), 1e-15);
}

TEST(Psi, UnitFirstArgumentKeepsOnlyLeadingTerm) {
    cplx b(-0.4, 0.0), z(1.3, 0.7);
    EXPECT_LT(std::abs(psi({1.0, 0}, b, 0.5, z, ctx05) - qpochhammer(b, 0.5, std::nullopt, ctx05)), 1e-15);
}

TEST(Psi, MatchesSeparateSeriesOracle) {
    // (q^2;q^2)_inf * 1phi1(0; q^2 | q^2, q^2) at q = 0.5, mpmath 40 digits
    const double q2 = 0.25;
    EXPECT_NEAR(psi({0, 0}, {q2, 0}, q2, {q2, 0}, ctx05).real(), 0.40393252198673029560, 1e-15);
}

TEST(Psi, EntireInSecondArgumentAtPoles) {
    // b = base^{-2} is a pole of 1phi1 but Psi stays finite
    cplx v = psi({0.2, 0}, {4.0, 0}, 0.5, {0.3, 0}, ctx05);
    EXPECT_TRUE(std::isfinite(v.real()));
}

TEST(Wall, DegreeZeroValue) {
    // the example in the design notes quotes 0.7600; the defining formula gives (q^2;q^2)_inf^{1/2}
    QContext c(0.5);
    double v = wall_polynomial(0, 0, 0, c);
    EXPECT_NEAR(v, 0.82978162013890119, 1e-14);
    EXPECT_NEAR(v * v, qpochhammer({0.25, 0}, 0.25, std::nullopt, c).real(), 1e-14);
}

TEST(Wall, DegreeZeroIsPrefactorOnly) {
    const double q = 0.5, q2 = q * q;
    for (long p = 0; p <= 4; ++p)
        for (long t = 0; t <= 3; ++t) {
            double pre = std::pow(q, double(p * (t + 1))) *
                         std::sqrt(qpochhammer({std::pow(q, 2.0 * t + 2), 0}, q2, std::nullopt, ctx05).real() *
                                   qpochhammer({std::pow(q, 2.0 * p + 2), 0}, q2, std::nullopt, ctx05).real() /
                                   qpochhammer({q2, 0}, q2, std::nullopt, ctx05).real());
            EXPECT_NEAR(wall_polynomial(0, p, t, ctx05), pre, 1e-14);
        }
}

TEST(Wall, MatchesPPlusBridge) {
    EXPECT_NEAR(p_plus(3, 3, 2, ctx05), -wall_polynomial(2, 3, 1, ctx05), 1e-12);
    EXPECT_NEAR(p_plus(1, 1, 1, ctx05), -wall_polynomial(1, 1, 0, ctx05), 1e-12);
}

TEST(Wall, NegativeTIsZeroAndBadArgsThrow) {
    EXPECT_EQ(wall_polynomial(1, 2, -1, ctx05), 0.0);
    EXPECT_THROW(wall_polynomial(-1, 0, 0, ctx05), Error);
}

TEST(BigQLaguerre, DegreeZeroAndOne) {
    const double base = 0.25, a = 0.3, b = -0.6;
    cplx x(0.7, 0.2);
    EXPECT_LT(std::abs(big_q_laguerre(0, x, a, b, base, ctx05) - cplx(1, 0)), 1e-15);
    cplx want = 1.0 + (1.0 - 1.0 / base) * (1.0 - x) / ((1.0 - base) * (1.0 - a * base) * (1.0 - b * base)) * base;
    EXPECT_LT(std::abs(big_q_laguerre(1, x, a, b, base, ctx05) - want), 1e-14);
}

TEST(BigQLaguerre, ThreeTermRecurrence) {
    // (1-q^{4(p+n+1)}) P_{n+1} - ((1-(1+q^2)q^{2n}) q^{2n+4p+2} + 1) P_n + q^{2n+4p+2}(1-q^{2n}) P_{n-1} = (x-1) P_n
    const double q = 0.5, q2 = q * q;
    const long p = 1;
    auto P = [&](long n, double x) {
        return big_q_laguerre(n, {x, 0}, std::pow(q, 2.0 * p), -std::pow(q, 2.0 * p), q2, ctx05).real();
    };
    for (double x : {-0.8, 0.1, 0.55, 1.7})
        for (long n : {1L, 2L, 3L}) {
            double c = std::pow(q, 2.0 * n + 4 * p + 2);
            double lhs = (1 - std::pow(q, 4.0 * (p + n + 1))) * P(n + 1, x) -
                         ((1 - (1 + q2) * std::pow(q, 2.0 * n)) * c + 1) * P(n, x) + c * (1 - std::pow(q, 2.0 * n)) * P(n - 1, x);
            EXPECT_NEAR(lhs, (x - 1) * P(n, x), 1e-12) << "n=" << n << " x=" << x;
        }
}

TEST(QBessel, TrivialArguments) {
    EXPECT_EQ(q_bessel(0, 0.0, 0.25, ctx05), 1.0);
    EXPECT_EQ(q_bessel(1, 0.0, 0.25, ctx05), 0.0);
}

TEST(QBessel, MatchesPZeroRelation) {
    // P0(p,v,w) = (-q)^{p-w} J_{v-w}(q^{p-w}; q^2); P0(1,2,0) frozen from an independent mpmath evaluation
    const double q = 0.5;
    EXPECT_NEAR(-q * q_bessel(2, q, q * q, ctx05), -0.16297862440588505, 1e-15);
    EXPECT_NEAR(q_bessel(0, 1.0, q * q, ctx05), 0.58665286961127968, 1e-15);
    EXPECT_NEAR(q_bessel_lattice(2, 1, q, ctx05), q_bessel(2, q, q * q, ctx05), 1e-15);
}

TEST(QBessel, LatticeFormAgreesWithDoubleArgumentWhenWellConditioned) {
    for (long a = -2; a <= 3; ++a)
        for (long k = 0; k <= 5; ++k)
            EXPECT_NEAR(q_bessel_lattice(a, k, 0.5, ctx05), q_bessel(a, std::pow(0.5, double(k)), 0.25, ctx05), 1e-13)
                << a << " " << k;
}
