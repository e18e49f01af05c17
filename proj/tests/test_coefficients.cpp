#include <gtest/gtest.h>

#include <cmath>

#include "qlink/coefficients.hpp"
#include "qlink/qseries.hpp"

using namespace qlink;

namespace {

const QContext ctx05(0.5);

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double pinf(double a, double b) { return qpochhammer({a, 0}, b, std::nullopt, ctx05).real(); }
double pfin(double a, double b, long n) { return qpochhammer({a, 0}, b, n, ctx05).real(); }

}  // namespace

// Frozen from an independent 40-digit mpmath evaluation of the defining sums at q = 0.5.
TEST(FrozenValues, PPlus) {
    struct Row { long p, v, w; double want; };
    for (const Row& r : {Row{0, 0, 0, 0.82978162013890119}, Row{1, 2, 0, -0.14283246203497659},
                         Row{3, 1, 2, 0.079135692412559743}, Row{5, 5, 5, 0.58684741169193464},
                         Row{2, 7, 4, 0.0013748611078362133}, Row{12, 9, 10, -0.020717705393464867}}) {
        EXPECT_LT(rel(p_plus(r.p, r.v, r.w, ctx05), r.want), 1e-13) << r.p << r.v << r.w;
        EXPECT_LT(rel(p_plus_alt(r.p, r.v, r.w, ctx05), r.want), 1e-13) << r.p << r.v << r.w;
    }
}

TEST(FrozenValues, PZero) {
    struct Row { long p, v, w; double want; };
    for (const Row& r : {Row{0, 0, 0, 0.58665286961127968}, Row{1, 2, 0, -0.16297862440588505},
                         Row{-3, 1, 2, 1.3828186633230471e-6}, Row{5, -5, 5, 1.1188518365862017e-33},
                         Row{2, 7, -4, 3.0752279421322601e-22}})
        EXPECT_LT(rel(p_zero(r.p, r.v, r.w, ctx05), r.want), 1e-12) << r.p << " " << r.v << " " << r.w;
}

TEST(FrozenValues, PMinus) {
    EXPECT_LT(rel(p_minus({3, 1}, {1, 1}, {2, 1}, ctx05), 0.083749551624105502), 1e-12);
    EXPECT_LT(rel(p_minus({1, 1}, {-2, -1}, {-4, -1}, ctx05), 0.0012797996728679218), 1e-12);
    EXPECT_LT(rel(p_minus({5, 1}, {-1, -1}, {-3, -1}, ctx05), 5.6856895428728946e-7), 1e-12);
    // sign labels violate c(v)c(w) = c(p)
    EXPECT_EQ(p_minus({2, 1}, {-1, 1}, {-3, -1}, ctx05), 0.0);
}

TEST(FrozenValues, QCoefficient) {
    EXPECT_LT(rel(q_coeff({0, 1}, 0, 0, ctx05), 0.50388732424577236), 1e-13);
    EXPECT_LT(rel(q_coeff({2, 1}, 1, 3, ctx05), 0.69580413180785643), 1e-13);
    EXPECT_LT(rel(q_coeff({-1, -1}, 2, 1, ctx05), 0.17149858514250884), 1e-13);
    EXPECT_LT(rel(q_coeff({3, -1}, 2, 4, ctx05), 0.50959520816085802), 1e-13);
}

TEST(FrozenValues, GElements) {
    struct Row { int sign; long r, s, n; double want; };
    for (const Row& r : {Row{1, 0, 0, 0, 0.50388732424577236}, Row{1, 1, 2, 3, 0.73881747491618234},
                         Row{-1, 1, 2, 1, -0.068599434057003535}, Row{1, 2, 0, 5, 0.0026562359386769746}}) {
        EXPECT_LT(rel(g_elem(r.sign, r.r, r.s, r.n, 0, ctx05).coef, r.want), 1e-13);
        EXPECT_LT(rel(g_elem_alt(r.sign, r.r, r.s, r.n, 0, ctx05).coef, r.want), 1e-13);
    }
}

TEST(PPlus, ColumnNormalization) {
    double s = 0.0;
    for (long w = 0; w <= 40; ++w) s += std::pow(p_plus(0, w, w, ctx05), 2);
    EXPECT_NEAR(s, 1.0, 1e-10);
}

TEST(PPlus, WallBridgeSpot) {
    EXPECT_NEAR(p_plus(1, 1, 1, ctx05), -wall_polynomial(1, 1, 0, ctx05), 1e-12);
}

TEST(PPlus, DualFormAgreement) {
    EXPECT_NEAR(p_plus_alt(2, 0, 3, ctx05), p_plus(2, 0, 3, ctx05), 1e-10);
    QContext c3(0.3);
    EXPECT_NEAR(p_plus_alt(5, 5, 0, c3), p_plus(5, 5, 0, c3), 1e-10);
}

TEST(PPlus, RejectsNegativeArguments) {
    try {
        p_plus(-1, 0, 0, ctx05);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidIndex);
    }
}

TEST(PZero, TranslationInvariance) {
    EXPECT_EQ(p_zero(1, 1, 1, ctx05), p_zero(0, 0, 0, ctx05));
    for (long k : {-3L, 2L, 7L}) EXPECT_EQ(p_zero(2 + k, -1 + k, 3 + k, ctx05), p_zero(2, -1, 3, ctx05));
}

TEST(PZero, DirectSeriesAtOrigin) {
    // (1/(q^2;q^2)_inf) Psi(0; q^2 | q^2, q^2)
    const double q2 = 0.25;
    double want = psi({0, 0}, {q2, 0}, q2, {q2, 0}, ctx05).real() / pinf(q2, q2);
    EXPECT_NEAR(p_zero(0, 0, 0, ctx05), want, 1e-14);
}

TEST(PMinus, ExchangeRulesAcrossOrderings) {
    // every ordering of the same triple goes through the sorted evaluation; compare against
    // the two exchange relations directly
    const double q = 0.5;
    SignedIndex a{2, 1}, b{-1, -1}, c{-3, -1};
    double abc = p_minus(a, b, c, ctx05);
    double bac = p_minus(b, a, c, ctx05);
    double acb = p_minus(a, c, b, ctx05);
    auto sp = [](int s, int e) { return (s < 0 && (e & 1)) ? -1.0 : 1.0; };
    auto n1 = [](int e) { return (e & 1) ? -1.0 : 1.0; };
    EXPECT_NEAR(abc, n1(a.value + b.value) * sp(c.sign, c.value + 1) * std::pow(q, a.value - b.value) * bac, 1e-14);
    EXPECT_NEAR(abc, sp(a.sign, a.value + 1) * sp(b.sign, b.value + 1) * sp(c.sign, c.value + 1) * acb, 1e-14);
    EXPECT_NE(abc, 0.0);
}

TEST(PMinus, OutsideIndexSetIsZero) { EXPECT_EQ(p_minus({0, -1}, {0, 1}, {0, -1}, ctx05), 0.0); }

TEST(QCoefficient, ClosedFormAtOrigin) {
    // (q^4;q^4)^{1/2} / ((-q^2;q^2)^{1/2} (-1;q^2)^{1/2})
    const double q2 = 0.25, q4 = q2 * q2;
    double want = std::sqrt(pinf(q4, q4)) / (std::sqrt(pinf(-q2, q2)) * std::sqrt(pinf(-1.0, q2)));
    EXPECT_NEAR(q_coeff({0, 1}, 0, 0, ctx05), want, 1e-14);
}

TEST(QCoefficient, AdmissibilityZeros) {
    EXPECT_EQ(q_coeff({-3, 1}, 0, 2, ctx05), 0.0);  // p + n < 0 leaves the support
    EXPECT_EQ(q_coeff({-2, -1}, 1, 4, ctx05), 0.0);  // r + p < 0 for the -1 family
}

TEST(GElement, TargetsAndIndexSetMembership) {
    GElement gp = g_elem(1, 0, 0, 0, 0, ctx05);
    EXPECT_EQ(gp.target, (BasisIndex{Leg{-1, 1}, Leg{0, 1}}));
    EXPECT_NE(gp.coef, 0.0);
    GElement gm = g_elem(-1, 0, 0, 0, 0, ctx05);
    EXPECT_EQ(gm.target, (BasisIndex{Leg{-1, -1}, Leg{0, 1}}));
    EXPECT_NE(gm.coef, 0.0);
    // n - r - s - 1 >= 0 is outside I_- for the - sign
    EXPECT_EQ(g_elem(-1, 0, 0, 3, 0, ctx05).coef, 0.0);
    EXPECT_EQ(g_elem(1, 2, 1, 5, 3, ctx05).target, (BasisIndex{Leg{1, 1}, Leg{2, 1}}));
}

TEST(GElement, DiagonalClosedForm) {
    // (1/sqrt2) q^{p(p-1)/2} (-q^{-2p+2};q^2)_p^{1/2} (q^{2p+2};q^2)_inf^{1/2} / (-q^2;q^2)_inf^{1/2}
    const double q = 0.5, q2 = q * q;
    for (long p = 0; p <= 4; ++p) {
        double want = std::pow(q, p * (p - 1) / 2.0) * std::sqrt(pfin(-std::pow(q, -2.0 * p + 2), q2, p)) *
                      std::sqrt(pinf(std::pow(q, 2.0 * p + 2), q2)) / std::sqrt(pinf(-q2, q2)) / std::sqrt(2.0);
        EXPECT_NEAR(g_elem(1, 0, 0, p, 0, ctx05).coef, want, 1e-14) << "p=" << p;
    }
}

TEST(GElement, AlternativeDisplayAgrees) {
    for (int sign : {1, -1}) EXPECT_NEAR(g_elem(sign, 0, 0, 0, 0, ctx05).coef, g_elem_alt(sign, 0, 0, 0, 0, ctx05).coef, 1e-12);
    EXPECT_NEAR(g_elem(1, 2, 1, 5, 3, ctx05).coef, g_elem_alt(1, 2, 1, 5, 3, ctx05).coef, 1e-12);
    EXPECT_NEAR(g_elem(-1, 3, 3, 7, -2, ctx05).coef, g_elem_alt(-1, 3, 3, 7, -2, ctx05).coef, 1e-12);
}

TEST(KPolynomial, TrivialAndTwoTerm) {
    for (int sign : {1, -1})
        for (double x : {0.0, 0.3, 2.0}) EXPECT_EQ(k_polynomial(0, 5, sign, x, ctx05), 1.0);
    EXPECT_TRUE(std::isfinite(k_polynomial(1, 1, 1, 0.25, ctx05)));
    EXPECT_THROW(k_polynomial(-1, 0, 1, 0.0, ctx05), Error);
}

TEST(Xi, PlusFamilyUnitNorm) {
    Window w{30, -30, 30, 8};
    SparseVector v = xi_vector(Family::Plus, 0, 0, {0, 1}, 0, w, ctx05);
    EXPECT_NEAR(v.norm(), 1.0, 1e-10);
}

TEST(Xi, MinusFamilyDisjointTSupports) {
    Window w{30, -30, 30, 8};
    SparseVector a = xi_vector(Family::Minus, 0, 0, {0, 1}, 0, w, ctx05);
    SparseVector b = xi_vector(Family::Minus, 0, 0, {0, 1}, 1, w, ctx05);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(inner(a, b), cplx(0.0, 0.0));
}

TEST(Xi, ZeroFamilyTranslationCovariance) {
    Window w{30, -30, 30, 8};
    for (long p : {0L, 3L, -2L}) {
        SparseVector a = xi_vector(Family::Zero, 1, -1, {static_cast<int>(p), 1}, 2, w, ctx05);
        SparseVector b = xi_vector(Family::Zero, 1, -1, {static_cast<int>(p - 1), 1}, 2, w, ctx05);
        ASSERT_FALSE(a.empty());
        for (const auto& [k, c] : a) {
            BasisIndex shifted{Leg{k[0].v - 1, 1}, k[1], Leg{k[2].v - 1, 1}, k[3]};
            if (!in_window(shifted, family_signature(Family::Zero), w)) continue;
            EXPECT_EQ(b.at(shifted), c) << k.str();
        }
    }
}

TEST(Xi, WindowTooSmallIsReported) {
    Window tiny{2, -2, 2, 0};
    try {
        xi_vector(Family::Plus, 0, 0, {3, 1}, 2, tiny, ctx05);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WindowTooSmall);
    }
}
