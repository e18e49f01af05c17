#include <gtest/gtest.h>

#include <cmath>

#include "qlink/operators.hpp"

using namespace qlink;

namespace {

const QContext ctx05(0.5);
const Window small{10, -6, 6, 3};

BasisIndex idx(std::initializer_list<int> v) { return BasisIndex::plain(v); }

// max |x - y| over the interior columns of the domain
double interior_diff(const TruncatedOperator& x, const TruncatedOperator& y, const Window& w) {
    double m = 0.0;
    for (const auto& col : window_basis(x.domain(), w, true)) m = std::max(m, max_diff(x.column(col), y.column(col)));
    return m;
}

}  // namespace

TEST(SU2Generators, AnnihilatorKillsBottomColumnAndShiftCoefficient) {
    auto g = gen_su2(small, ctx05);
    EXPECT_TRUE(g.a_plus.column(idx({0, 0})).empty());
    EXPECT_DOUBLE_EQ(g.b_plus.at(idx({2, 1}), idx({2, 0})).real(), 0.25);
    EXPECT_NEAR(g.a_plus.at(idx({2, 3}), idx({3, 3})).real(), std::sqrt(1 - std::pow(0.5, 6)), 1e-15);
}

TEST(SU2Generators, UnitarityRelationOnInterior) {
    auto g = gen_su2(small, ctx05);
    auto lhs = g.a_plus.adjoint().mul(g.a_plus).add(g.b_plus.adjoint().mul(g.b_plus));
    EXPECT_LT(interior_diff(lhs, TruncatedOperator::identity(lhs.domain(), small), small), 1e-14);
}

TEST(SU2Generators, QCommutation) {
    auto g = gen_su2(small, ctx05);
    auto ab = g.a_plus.mul(g.b_plus), ba = g.b_plus.mul(g.a_plus).scaled(0.5);
    EXPECT_LT(interior_diff(ab, ba, small), 1e-14);
    EXPECT_GT(ab.nnz(), 0u);
}

TEST(E2Generators, UnboundedGrowthAppearsAsEntries) {
    auto g = gen_e2(small, ctx05);
    EXPECT_DOUBLE_EQ(g.b_zero.at(idx({-2, 1}), idx({-2, 0})).real(), 4.0);
    EXPECT_DOUBLE_EQ(g.a_zero.at(idx({-1, 0}), idx({0, 0})).real(), 1.0);
}

TEST(SphereGenerators, DiagonalAndYRelation) {
    auto s = gen_sphere(small, ctx05);
    EXPECT_DOUBLE_EQ(s.W_plus.at(idx({1}), idx({1})).real(), 0.25);
    EXPECT_DOUBLE_EQ(s.W_minus.at(idx({1}), idx({1})).real(), -0.25);
    // Y Y^* = 1 - q^4 W^2
    auto yy = s.Y_plus.mul(s.Y_plus.adjoint());
    auto rhs = TruncatedOperator::identity(yy.domain(), small).add(s.W_plus.mul(s.W_plus), -std::pow(0.5, 4));
    EXPECT_LT(interior_diff(yy, rhs, small), 1e-15);
}

TEST(Coaction, WColumnAtOrigin) {
    const double q = 0.5;
    auto w = coaction_sphere(ops::SphereGen::W, small, ctx05);
    SparseVector col = w.column(idx({0, 2, 0}));
    EXPECT_NEAR(col.at(idx({1, 1, 1})).real(), std::sqrt(1 - q * q) * std::sqrt(1 - std::pow(q, 4)), 1e-15);
    // (1 - (1+q^2) b^*b) acts as -q^2 on e_0; the same number is the Jacobi diagonal at n = 0
    EXPECT_NEAR(col.at(idx({0, 2, 0})).real(), -q * q, 1e-15);
    EXPECT_EQ(col.entries().size(), 2u);
}

TEST(Jacobi, DiagonalSymmetryAndEigenvector) {
    auto j = jacobi_block(0, Window{40, -4, 4, 0}, ctx05);
    EXPECT_DOUBLE_EQ(j.at(idx({0}), idx({0})).real(), -0.25);
    for (int i = 0; i < 40; ++i) EXPECT_EQ(j.at(idx({i + 1}), idx({i})), j.at(idx({i}), idx({i + 1})));
    // eigenvector at +1 from the q_coeff column (r = 0, p = 0)
    SparseVector xi;
    for (int n = 0; n <= 40; ++n) xi.add(idx({n}), q_coeff({0, 1}, 0, n, ctx05));
    SparseVector jx = as_linop(j)(xi);
    double res = 0.0;
    for (int n = 0; n < 40; ++n) res += std::norm(jx.at(idx({n})) - xi.at(idx({n})));
    EXPECT_LT(std::sqrt(res), 1e-9);
    EXPECT_NEAR(xi.norm(), 1.0, 1e-12);
}

TEST(Jacobi, DenseMatchesSparse) {
    auto j = jacobi_block(-2, Window{12, -4, 4, 0}, ctx05);
    auto d = jacobi_dense(-2, 13, 0.5);
    for (int a = 0; a <= 12; ++a)
        for (int b = 0; b <= 12; ++b) EXPECT_EQ(j.at(idx({a}), idx({b})).real(), d(a, b));
}

TEST(MultiplicativeUnitary, TrivialColumnIsXiVector) {
    SparseVector col = ops::W_adj(Family::Plus, ctx05)(basis_vector(idx({0, 0, 0, 0})));
    SparseVector xi = xi_full(Family::Plus, 0, 0, {0, 1}, 0, ctx05);
    EXPECT_LT(max_diff(col, xi), 1e-15);
    EXPECT_NEAR(col.norm(), 1.0, 1e-10);
}

TEST(MultiplicativeUnitary, ColumnsAreOrthonormal) {
    auto w = ops::W_adj(Family::Plus, ctx05);
    std::vector<SparseVector> cols;
    for (int r : {0, 2})
        for (int s : {-1, 1})
            for (int p : {0, 3})
                for (int t : {-2, 0, 2}) cols.push_back(w(basis_vector(BasisIndex{Leg{r, 1}, Leg{s, 1}, Leg{p, 1}, Leg{t, 1}})));
    double m = 0.0;
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) m = std::max(m, std::abs(inner(cols[i], cols[j]) - (i == j ? 1.0 : 0.0)));
    EXPECT_LT(m, 1e-8);
}

TEST(MultiplicativeUnitary, ZeroFamilyShiftCovariance) {
    auto w = ops::W_adj(Family::Zero, ctx05);
    SparseVector a = w(basis_vector(BasisIndex{Leg{0, 1}, Leg{1, 1}, Leg{2, 1}, Leg{-1, 1}}));
    SparseVector b = w(basis_vector(BasisIndex{Leg{1, 1}, Leg{1, 1}, Leg{2, 1}, Leg{-1, 1}}));
    ASSERT_FALSE(a.empty());
    double m = 0.0;
    for (const auto& [k, c] : a) m = std::max(m, std::abs(b.at(BasisIndex{k[0], Leg{k[1].v + 1, 1}, k[2], k[3]}) - c));
    EXPECT_LT(m, 1e-15);
    EXPECT_NEAR(a.norm(), b.norm(), 1e-15);
}

TEST(Comult, ZeroFamilyShiftIsExact) {
    // x must be materialized on a window wide enough to hold the xi^0 supports;
    // at +-30 the deviation is still 3e-9
    Window wide{4, -60, 60, 0}, cols{4, -4, 4, 1};
    auto g = gen_e2(wide, ctx05);
    auto d = comult(g.a_zero, CornerLabel{Family::Zero, Family::Zero}, cols, ctx05);
    LinOp aa = tensor(ops::a_zero(), ops::a_zero());
    double m = 0.0;
    for (const auto& [col, v] : d.columns()) m = std::max(m, max_diff(v, aa(basis_vector(col))));
    EXPECT_LT(m, 1e-12);
    EXPECT_GT(d.nnz(), 0u);
}

TEST(Comult, RejectsWrongSignature) {
    auto g = gen_su2(small, ctx05);
    EXPECT_THROW(comult(g.a_plus, CornerLabel{Family::Zero, Family::Zero}, small, ctx05), Error);
}

TEST(FactoredBlocks, MatchGElements) {
    Window w{16, -10, 10, 4};
    struct Case { int sign; long r, s; double tol; };
    for (const Case& c : {Case{1, 0, 0, 1e-12}, Case{-1, 1, 2, 1e-10}, Case{1, 3, 1, 1e-10}}) {
        auto blk = g_block_factored(c.sign, c.r, c.s, w, ctx05);
        double m = 0.0;
        for (int n = 0; n <= 6; ++n)
            for (int k = -3; k <= 3; ++k) {
                GElement g = g_elem(c.sign, c.r, c.s, n, k, ctx05);
                if (g.coef == 0.0 && !in_window(g.target, hilbert_signature(Family::Minus), w)) continue;
                BasisIndex col{Leg{n, 1}, Leg{k, 1}};
                m = std::max(m, std::abs(blk.at(g.target, col) - g.coef));
            }
        EXPECT_LT(m, c.tol) << c.sign << " " << c.r << " " << c.s;
    }
}

TEST(OperatorAlgebra, AdjointTensorAndDump) {
    TruncatedOperator d({LegKind::N}, {LegKind::N});
    d.set(idx({0}), idx({0}), 2.0);
    d.set(idx({1}), idx({1}), -3.0);
    EXPECT_EQ(d.adjoint().dump(), d.dump());
    EXPECT_EQ(d.dump(), "(0)\t(0)\t2\t0\n(1)\t(1)\t-3\t0\n");
    Window w{3, -2, 2, 0};
    auto i1 = TruncatedOperator::identity({LegKind::N}, w);
    auto i2 = TruncatedOperator::identity({LegKind::Z}, w);
    EXPECT_EQ(i1.tensor(i2).dump(), TruncatedOperator::identity({LegKind::N, LegKind::Z}, w).dump());
    // adjoint is an involution on complex entries
    TruncatedOperator c({LegKind::N}, {LegKind::N});
    c.set(idx({0}), idx({2}), cplx(1.0, -2.0));
    EXPECT_EQ(c.adjoint().at(idx({2}), idx({0})), cplx(1.0, 2.0));
    EXPECT_EQ(c.adjoint().adjoint().dump(), c.dump());
}

TEST(OperatorAlgebra, SignedIndexInDump) {
    TruncatedOperator d({LegKind::Im}, {LegKind::Im});
    d.set(BasisIndex{Leg{-2, -1}}, BasisIndex{Leg{-2, -1}}, 1.0);
    EXPECT_EQ(d.dump(), "(-2m)\t(-2m)\t1\t0\n");
}

TEST(OperatorAlgebra, RestrictionNormAndMismatch) {
    auto g = gen_su2(small, ctx05);
    EXPECT_NEAR(g.b_plus.restriction_norm_interior(small), 1.0, 1e-15);
    auto s = gen_sphere(small, ctx05);
    EXPECT_THROW(g.a_plus.mul(s.W_plus), Error);
}

TEST(Index, MembershipRules) {
    EXPECT_TRUE(in_Iminus({5, 1}));
    EXPECT_FALSE(in_Iminus({0, -1}));
    EXPECT_TRUE(in_J({0, -1}));
    EXPECT_FALSE(in_J({-1, -1}));
    EXPECT_THROW((BasisIndex{Leg{-1, 1}}.validate({LegKind::N})), Error);
    EXPECT_NO_THROW((BasisIndex{Leg{-1, -1}, Leg{3, 1}}.validate({LegKind::Im, LegKind::Z})));
}
