#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "qlink/verify.hpp"

using namespace qlink;

namespace {

const QContext ctx05(0.5);

json strip_runtime(json j) {
    if (j.is_object()) {
        j.erase("runtime_ms");
        for (auto& [k, v] : j.items()) v = strip_runtime(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_runtime(v);
    }
    return j;
}

SummationCase sc(cplx x, cplx y, int p) {
    SummationCase c;
    c.x = x;
    c.y = y;
    c.p = p;
    return c;
}

}  // namespace

TEST(Summation, FirstIdentityExamples) {
    for (const auto& c : {sc(1.0, 1.0, 0), sc({0.7, 0.2}, -0.4, 3)}) {
        CheckReport r = verify_sum1(c, ctx05);
        EXPECT_TRUE(r.pass) << to_json(r).dump();
        EXPECT_LT(r.metric, 1e-9);
    }
}

TEST(Summation, SecondIdentityExamples) {
    EXPECT_TRUE(verify_sum2(sc(1.2, 0.9, 2), 1, ctx05).pass);
    EXPECT_TRUE(verify_sum2(sc(-0.5, {0.0, 0.3}, 4), -1, ctx05).pass);
    for (int sign : {1, -1}) {
        CheckReport r = verify_sum2(sc({0.4, -0.9}, {1.1, 0.2}, 0), sign, ctx05);
        EXPECT_LT(r.metric, 1e-9) << sign;
    }
}

TEST(Summation, ThirdIdentityExamples) {
    EXPECT_TRUE(verify_sum3(sc(1.0, 1.0, 1), ctx05).pass);
    EXPECT_TRUE(verify_sum3(sc({0.0, 0.8}, -1.1, 5), ctx05).pass);
    CheckReport z = verify_sum3(sc(0.0, {0.3, 0.6}, 2), ctx05);
    EXPECT_TRUE(z.pass);
    EXPECT_LT(z.metric, 1e-15);
}

TEST(Summation, SamplingIsSeededAndInsideAnnulus) {
    auto a = sample_summation_cases(2, 50, 6, 0.5, 7), b = sample_summation_cases(2, 50, 6, 0.5, 7);
    auto c = sample_summation_cases(2, 50, 6, 0.5, 8);
    ASSERT_EQ(a.size(), 50u);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].x, b[i].x);
        EXPECT_EQ(a[i].p, b[i].p);
        differs |= a[i].x != c[i].x;
        for (cplx v : {a[i].x, a[i].y}) {
            EXPECT_GE(std::abs(v), 0.3 - 1e-15);
            EXPECT_LE(std::abs(v), 1.5 + 1e-15);
        }
        EXPECT_LE(a[i].p, 6);
    }
    EXPECT_TRUE(differs);
}

TEST(Gram, PlusAndZeroFamilies) {
    Window w{30, -30, 30, 8};
    CheckReport plus = verify_gram({Family::Plus}, GramRanges{}, w, ctx05);
    EXPECT_TRUE(plus.pass) << to_json(plus).dump();
    CheckReport zero = verify_gram({Family::Zero}, GramRanges{}, w, ctx05);
    EXPECT_TRUE(zero.pass) << to_json(zero).dump();
}

TEST(Gram, MinusFamilyReportsDiagonalSeparately) {
    Window w{30, -30, 30, 8};
    CheckReport r = verify_gram({Family::Minus}, GramRanges{1, 2, -1, 1}, w, ctx05);
    EXPECT_TRUE(r.pass) << to_json(r).dump();
    EXPECT_TRUE(r.details.contains("minus_diagonal_is_unit"));
}

TEST(Eigen, ResidualsAndExclusions) {
    CheckReport r = verify_eigen(2, 1, {0}, ctx05);
    EXPECT_TRUE(r.pass) << to_json(r).dump();
    EXPECT_GT(r.details["excluded_inadmissible"].get<int>(), 0);
    EXPECT_GT(r.details["checked"].get<int>(), 0);
}

TEST(NoNegativeEigen, DivergenceAndInconclusiveShortSum) {
    for (long p : {-1L, -2L}) {
        CheckReport r = verify_no_negative_eigen(p, 40, ctx05);
        EXPECT_TRUE(r.pass) << p;
        EXPECT_EQ(r.relation, "ge");
        EXPECT_GT(r.metric, 1e6);
    }
    CheckReport shortsum = verify_no_negative_eigen(-1, 2, ctx05);
    EXPECT_FALSE(shortsum.pass);
    EXPECT_LT(shortsum.metric, 1e6);
    EXPECT_NE(shortsum.notes.find("inconclusive"), std::string::npos);
}

TEST(EtaNorms, ClosedFormsMatchDirectSums) {
    CheckReport r = verify_eta_norms(2, 3, ctx05);
    EXPECT_TRUE(r.pass) << to_json(r).dump();
}

TEST(Implementation, GeneratorsAndExactShift) {
    CheckReport r = verify_implementation(Window{}, ctx05);
    EXPECT_TRUE(r.pass) << to_json(r).dump();
    EXPECT_TRUE(r.details["Delta0(a0)_exact"].get<bool>());
}

TEST(Implementation, NoInteriorColumnsIsAnError) {
    try {
        verify_implementation(Window{8, -4, 4, 8}, ctx05);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WindowTooSmall);
    }
}

TEST(L0Plus, DeviationIsTheDroppedSeriesMass) {
    for (long k_cut : {0L, 4L, 12L}) {
        CheckReport r = verify_L0plus_comult(Window{}, k_cut, ctx05);
        double dropped = r.details["dropped_series_mass"].get<double>();
        EXPECT_GT(dropped, 0.0);
        EXPECT_NEAR(r.metric, dropped, 1e-3 * dropped + 1e-14) << k_cut;
        EXPECT_LT(r.details["deviation_untruncated"].get<double>(), 1e-12) << k_cut;
    }
}

TEST(KeyIdentities, SmallRange) {
    CheckReport r = verify_key_identities(1, ctx05);
    EXPECT_TRUE(r.pass) << to_json(r).dump();
}

TEST(CocycleAndGrouplike, Pass) {
    CheckReport c = verify_cocycle_omega(ctx05);
    EXPECT_TRUE(c.pass) << to_json(c).dump();
    EXPECT_EQ(c.details["omega_squared_dev"].get<double>(), 0.0);
    CheckReport g = verify_grouplike(ctx05);
    EXPECT_TRUE(g.pass) << to_json(g).dump();
    EXPECT_EQ(g.details["e_selfadjoint_unitary_dev"].get<double>(), 0.0);
}

TEST(ImplementingUnitary, IsometryAndMatrixUnits) {
    EXPECT_TRUE(verify_G_unitary(3, ctx05).pass);
    EXPECT_TRUE(verify_G_alpha(1, ctx05).pass);
    EXPECT_TRUE(verify_intertwining(ctx05).pass);
}

TEST(Coefficients, IdentityChecks) {
    EXPECT_TRUE(verify_psi_factorization(40, 42, ctx05).pass);
    EXPECT_TRUE(verify_pplus_dual(6, {0.3, 0.5}).pass);
    EXPECT_TRUE(verify_wall_bridge(4, 3, ctx05).pass);
    EXPECT_TRUE(verify_qbessel(4, ctx05).pass);
    EXPECT_TRUE(verify_g_alt(3, 8, ctx05).pass);
    EXPECT_TRUE(verify_factored_blocks(2, Window{}, ctx05).pass);
}

TEST(Coefficients, QBesselAtSmallQ) {
    // the lattice form keeps this well conditioned for negative exponents
    EXPECT_TRUE(verify_qbessel(6, QContext(0.3)).pass);
}

// ---- properties ----------------------------------------------------------------

TEST(Properties, WindowEnlargementNeverIncreasesDeviation) {
    const Window small{16, -10, 10, 4}, large{28, -16, 16, 4};
    double a = verify_implementation(small, ctx05).metric, b = verify_implementation(large, ctx05).metric;
    EXPECT_LE(b, a + 1e-12);
    double c = verify_factored_blocks(2, small, ctx05).metric, d = verify_factored_blocks(2, large, ctx05).metric;
    EXPECT_LE(d, c + 1e-12);
}

TEST(Properties, ReportsAreReproducibleExceptRuntime) {
    CheckConfig cfg;
    for (const char* id : {"verify_sum2", "verify_psi_factorization", "verify_wall_bridge", "verify_eta_norms"}) {
        json a = to_json(run_check(id, cfg)), b = to_json(run_check(id, cfg));
        EXPECT_EQ(strip_runtime(a).dump(), strip_runtime(b).dump()) << id;
    }
    cfg.seed = 43;
    EXPECT_NE(to_json(run_check("verify_sum1", cfg))["details"].dump(),
              to_json(run_check("verify_sum1", CheckConfig{}))["details"].dump());
}

TEST(Properties, ManifestIsTotal) {
    std::set<std::string> ids, covered;
    for (const auto& c : check_registry()) {
        ids.insert(c.id);
        EXPECT_FALSE(c.description.empty());
        EXPECT_GT(c.tolerance, 0.0);
    }
    EXPECT_EQ(ids.size(), check_registry().size());
    for (const auto& [what, checks] : coverage_manifest()) {
        EXPECT_FALSE(checks.empty()) << what;
        for (const auto& id : checks) {
            EXPECT_TRUE(find_check(id)) << id;
            covered.insert(id);
        }
    }
    EXPECT_EQ(covered, ids);
}

TEST(Registry, SortedAndErrorsBecomeFailedReports) {
    const auto& reg = check_registry();
    for (std::size_t i = 1; i < reg.size(); ++i) EXPECT_LT(reg[i - 1].id, reg[i].id);
    EXPECT_THROW(run_check("no_such_check", CheckConfig{}), Error);

    CheckConfig cfg;
    cfg.window = Window{8, -4, 4, 8};
    CheckReport r = run_check("verify_implementation", cfg);
    EXPECT_FALSE(r.pass);
    EXPECT_TRUE(std::isnan(r.metric));
    EXPECT_NE(r.notes.find("WindowTooSmall"), std::string::npos);
}

TEST(Registry, ToleranceOverrideForcesFailure) {
    CheckConfig cfg;
    cfg.tol["verify_wall_bridge"] = 0.0;
    CheckReport r = run_check("verify_wall_bridge", cfg);
    EXPECT_EQ(r.tolerance, 0.0);
    EXPECT_GT(r.metric, 0.0);
    EXPECT_FALSE(r.pass);
}

TEST(Report, NonFiniteMetricFailsAndRelationIsHonoured) {
    CheckReport r;
    r.tolerance = 1.0;
    r.metric = std::numeric_limits<double>::quiet_NaN();
    r.decide();
    EXPECT_FALSE(r.pass);
    r.metric = 2.0;
    r.relation = "ge";
    r.decide();
    EXPECT_TRUE(r.pass);
    json j = to_json(r);
    for (const char* k : {"check_id", "params", "metric", "tolerance", "pass", "runtime_ms"}) EXPECT_TRUE(j.contains(k)) << k;
}
