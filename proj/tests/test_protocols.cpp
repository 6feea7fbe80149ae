#include <gtest/gtest.h>

#include "oracles.hpp"
#include "repeaterlab/protocols.hpp"

using namespace repeaterlab;

namespace {

const std::vector<double> kGrid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

TwoLinkParams single(double pl, double pr, double ps) { return {{pl}, {pr}, ps}; }

TwoLinkParams double_heralded(double l1, double l2, double r1, double r2, double ps) {
    return {{l1, l2}, {r1, r2}, ps};
}

void expect_row(const ProtocolChain<double>& c, Index row, std::vector<double> expected) {
    ASSERT_EQ(static_cast<Index>(expected.size()), c.size());
    for (Index j = 0; j < c.size(); ++j) {
        EXPECT_NEAR(c.matrix()(row, j), expected[j], 1e-15) << "row " << row << " col " << j;
    }
}

double pi_success(const ProtocolChain<double>& c) { return equilibrium(c.matrix())[c.success_state()]; }

} // namespace

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

TEST(BuildMultiheralded, SingleRound) {
    const auto c = build_multiheralded(MultiHeraldParams{{0.3}}, 1.0);
    expect_row(c, 0, {0.7, 0.3});
    expect_row(c, 1, {0.7, 0.3});
    EXPECT_EQ(c.success_state(), 1);
    EXPECT_EQ(c.start_state(), 0);
}

TEST(BuildMultiheralded, TwoRoundsIsBkp) {
    const auto c = build_multiheralded(MultiHeraldParams{{0.5, 0.5}}, 1.0);
    expect_row(c, 0, {0.5, 0.5, 0});
    expect_row(c, 1, {0.5, 0, 0.5});
    expect_row(c, 2, {0.5, 0.5, 0});
}

TEST(BuildMultiheralded, AllSuccessCycle) {
    const auto c = build_multiheralded(MultiHeraldParams{{1, 1, 1}}, 2.0);
    expect_row(c, 0, {0, 1, 0, 0});
    expect_row(c, 1, {0, 0, 1, 0});
    expect_row(c, 2, {0, 0, 0, 1});
    expect_row(c, 3, {0, 1, 0, 0});
    EXPECT_EQ(period(c.matrix(), 3), 3);
    EXPECT_EQ(c.labels(), (std::vector<std::string>{"0", "1", "2", "3"}));
}

TEST(BuildMultiheralded, Errors) {
    EXPECT_THROW(build_multiheralded(MultiHeraldParams{}, 1.0), Error);
    try {
        build_multiheralded(MultiHeraldParams{{0.5, 1.2}}, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ProbabilityOutOfRange);
    }
    try {
        build_multiheralded(MultiHeraldParams{{0.5}}, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidTau);
    }
}

TEST(BuildShs, Rows) {
    const auto ones = build_two_link_single_heralded(single(1, 1, 1), 1.0);
    expect_row(ones, 0, {0, 0, 0, 1, 0});
    expect_row(ones, 3, {0, 0, 0, 0, 1});

    const auto stuck = build_two_link_single_heralded(single(1, 0, 1), 1.0);
    expect_row(stuck, 2, {0, 0, 1, 0, 0});

    const auto half = build_two_link_single_heralded(single(0.5, 0.5, 1), 1.0);
    expect_row(half, 0, {0.25, 0.25, 0.25, 0.25, 0});
    EXPECT_EQ(half.labels(), (std::vector<std::string>{"00", "01", "10", "11", "S"}));
    EXPECT_EQ(half.success_state(), 4);

    const auto lossy = build_two_link_single_heralded(single(0.3, 0.6, 0.8), 1.0);
    expect_row(lossy, 1, {0, 0.7, 0, 0.3, 0});
    expect_row(lossy, 2, {0, 0, 0.4, 0.6, 0});
    expect_row(lossy, 3, {0.2, 0, 0, 0, 0.8});
}

TEST(BuildShs, WrongHeraldCount) {
    try {
        build_two_link_single_heralded(double_heralded(0.5, 0.5, 0.5, 0.5, 1), 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::WrongHeraldCount);
    }
}

TEST(BuildDhs, MatchesTransitionTable) {
    const double l1 = 0.2, l2 = 0.3, r1 = 0.4, r2 = 0.7, ps = 0.9;
    const auto c = build_two_link_double_heralded(double_heralded(l1, l2, r1, r2, ps), 1.0);
    const auto q = [](double x) { return 1 - x; };
    // Order 00 01 02 10 11 12 20 21 22 S.
    expect_row(c, 0, {q(l1) * q(r1), q(l1) * r1, 0, l1 * q(r1), l1 * r1, 0, 0, 0, 0, 0});
    expect_row(c, 1, {q(l1) * q(r2), 0, q(l1) * r2, l1 * q(r2), 0, l1 * r2, 0, 0, 0, 0});
    expect_row(c, 2, {0, 0, q(l1), 0, 0, l1, 0, 0, 0, 0});
    expect_row(c, 3, {q(l2) * q(r1), q(l2) * r1, 0, 0, 0, 0, l2 * q(r1), l2 * r1, 0, 0});
    expect_row(c, 4, {q(l2) * q(r2), 0, q(l2) * r2, 0, 0, 0, l2 * q(r2), 0, l2 * r2, 0});
    expect_row(c, 5, {0, 0, q(l2), 0, 0, 0, 0, 0, l2, 0});
    expect_row(c, 6, {0, 0, 0, 0, 0, 0, q(r1), r1, 0, 0});
    expect_row(c, 7, {0, 0, 0, 0, 0, 0, q(r2), 0, r2, 0});
    expect_row(c, 8, {q(ps), 0, 0, 0, 0, 0, 0, 0, 0, ps});
    expect_row(c, 9, {q(l1) * q(r1), q(l1) * r1, 0, l1 * q(r1), l1 * r1, 0, 0, 0, 0, 0});
}

TEST(BuildDhs, Row01WithCertainFirstLeftRound) {
    const double r2 = 0.35;
    const auto c = build_two_link_double_heralded(double_heralded(1, 0.5, 0.5, r2, 1), 1.0);
    expect_row(c, 1, {0, 0, 0, 1 - r2, 0, r2, 0, 0, 0, 0});
}

TEST(BuildDhs, AllOnesCycle) {
    const auto c = build_two_link_double_heralded(double_heralded(1, 1, 1, 1, 1), 1.0);
    EXPECT_EQ(period(c.matrix(), c.success_state()), 3);
    EXPECT_NEAR(pi_success(c), 1.0 / 3.0, 1e-12);
}

TEST(BuildDhs, GoldenEquilibriumAtOneHalf) {
    // Oracle: power iteration on the 10x10 matrix, frozen as 25/233.
    const auto c = build_two_link_double_heralded(double_heralded(0.5, 0.5, 0.5, 0.5, 1), 1.0);
    const auto brute = oracle::power_iteration(c.matrix().rows());
    EXPECT_NEAR(brute[9], 0.10729613733905578, 1e-14);
    EXPECT_NEAR(pi_success(c), 0.10729613733905578, 1e-14);
    EXPECT_NEAR(pi_success(c), 25.0 / 233.0, 1e-15);
}

TEST(ProtocolChain, InvariantsHoldForEveryBuiltChain) {
    for (double a : kGrid) {
        for (double b : kGrid) {
            for (const auto& c :
                 {build_multiheralded(MultiHeraldParams{{a, b}}, 1.0),
                  build_two_link_single_heralded(single(a, b, 0.7), 1.0),
                  build_two_link_double_heralded(double_heralded(a, b, b, a, 0.9), 1.0)}) {
                EXPECT_EQ(c.matrix().matrix().row(c.success_state()), c.matrix().matrix().row(c.start_state()));
                EXPECT_TRUE(is_irreducible(c.matrix()));
                EXPECT_EQ(period(c.matrix(), c.start_state()), 1);
            }
        }
    }
}

TEST(ProtocolChain, RejectsMismatchedRows) {
    MatrixX<double> m(2, 2);
    m << 0.5, 0.5, 0.2, 0.8;
    const auto p = StochasticMatrix<double>::validate(m);
    try {
        ProtocolChain<double>(p, {"F", "S"}, 1, 0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RowMismatch);
    }
    EXPECT_THROW(ProtocolChain<double>(p, {"only"}, 1, 0, 1.0), Error);
    EXPECT_THROW(ProtocolChain<double>(p, {"a", "b"}, 0, 0, 1.0), Error);
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

TEST(CfEquilibriumMultiheralded, Examples) {
    EXPECT_DOUBLE_EQ(cf_equilibrium_multiheralded(MultiHeraldParams{{0.3}}), 0.3);
    EXPECT_NEAR(cf_equilibrium_multiheralded(MultiHeraldParams{{0.5, 0.5}}), 1.0 / 6.0, 1e-16);
    const double solver = pi_success(build_multiheralded(MultiHeraldParams{{0.6, 0.4}}, 1.0));
    EXPECT_NEAR(solver, 0.15, 1e-15);
    EXPECT_NEAR(cf_equilibrium_multiheralded(MultiHeraldParams{{0.6, 0.4}}), 0.15, 1e-16);
}

TEST(CfEquilibriumMultiheralded, MatchesSolverOnGrid) {
    for (double a : kGrid)
        for (double b : kGrid)
            for (double c : {0.1, 0.5, 0.9}) {
                for (const auto& probs : {std::vector<double>{a, b}, std::vector<double>{a, b, c},
                                          std::vector<double>{c, a, b, a}}) {
                    const MultiHeraldParams params{probs};
                    EXPECT_NEAR(cf_equilibrium_multiheralded(params),
                                pi_success(build_multiheralded(params, 1.0)), 1e-10);
                }
            }
}

TEST(CfEquilibriumMultiheralded, SecondRoundMattersMore) {
    for (double a : kGrid)
        for (double b : kGrid)
            if (a > b) {
                EXPECT_LT(cf_equilibrium_multiheralded(MultiHeraldParams{{a, b}}),
                          cf_equilibrium_multiheralded(MultiHeraldParams{{b, a}}));
            }
}

TEST(CfLatencyVarianceMultiheralded, SpecialCases) {
    EXPECT_DOUBLE_EQ(cf_latency_variance_multiheralded(MultiHeraldParams{{1, 1}}), 0.0);
    EXPECT_DOUBLE_EQ(cf_latency_variance_multiheralded(MultiHeraldParams{{0.5}}), 2.0);
    for (double p1 : kGrid)
        for (double p2 : kGrid) {
            const double m = (1 + p1) / (p1 * p2);
            EXPECT_NEAR(cf_latency_variance_multiheralded(MultiHeraldParams{{p1, p2}}),
                        m * m - (3 + p1) / (p1 * p2), 1e-9);
        }
    try {
        cf_latency_variance_multiheralded(MultiHeraldParams{{0.5, 0.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroProbability);
    }
}

TEST(CfLatencyVarianceMultiheralded, MatchesHittingStats) {
    for (double a : kGrid)
        for (double b : kGrid)
            for (const auto& probs : {std::vector<double>{a}, std::vector<double>{a, b},
                                      std::vector<double>{a, b, 0.7}, std::vector<double>{0.4, a, b, 0.8}}) {
                const MultiHeraldParams params{probs};
                const auto c = build_multiheralded(params, 1.0);
                const auto h = hitting_stats(c.matrix(), c.success_state());
                const double expected = h.variance_from(c.start_state());
                EXPECT_NEAR(cf_latency_variance_multiheralded(params), expected,
                            1e-9 * std::max(1.0, std::abs(expected)));
            }
}

TEST(CfBkpExactMeanThroughput, Examples) {
    for (double p1 : kGrid)
        for (double p2 : kGrid) EXPECT_EQ(cf_bkp_exact_mean_throughput(p1, p2, 1), 0.0);
    EXPECT_NEAR(cf_bkp_exact_mean_throughput(0.5, 0.5, 1'000'000), 1.0 / 6.0, 1e-6);

    const auto c = build_multiheralded(MultiHeraldParams{{0.5, 0.5}}, 1.0);
    const double brute = oracle::visit_fraction(c.matrix().rows(), 0, 2, 4);
    EXPECT_NEAR(cf_bkp_exact_mean_throughput(0.5, 0.5, 4), brute, 1e-15);
}

TEST(CfBkpThroughputVarianceLeading, Examples) {
    EXPECT_DOUBLE_EQ(cf_bkp_throughput_variance_leading(1, 1), 0.0);
    EXPECT_NEAR(cf_bkp_throughput_variance_leading(0.5, 0.5), 0.25 * (2.25 - 0.25 * 3.5) / 3.375, 1e-16);
    // Small probabilities: correlations vanish relative to pi (1 - pi).
    const double p = 1e-4;
    const double pi = cf_equilibrium_multiheralded(MultiHeraldParams{{p, p}});
    EXPECT_NEAR(cf_bkp_throughput_variance_leading(p, p) / (pi * (1 - pi)), 1.0, 1e-3);
}

TEST(CfEquilibriumShs, Examples) {
    EXPECT_DOUBLE_EQ(cf_equilibrium_shs(single(1, 1, 1)), 0.5);
    EXPECT_NEAR(cf_equilibrium_shs(single(0.5, 0.5, 1)), 3.0 / 11.0, 1e-16);
    for (double p : kGrid) EXPECT_NEAR(cf_equilibrium_shs(single(p, p, 1)), p * (2 - p) / (3 - p * p), 1e-15);
    try {
        cf_equilibrium_shs(single(0, 0, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateChain);
    }
}

TEST(CfEquilibriumShs, SolverAgreementSymmetryAndMonotonicity) {
    for (double a : kGrid)
        for (double b : kGrid)
            for (double s : kGrid) {
                const double v = cf_equilibrium_shs(single(a, b, s));
                EXPECT_NEAR(v, pi_success(build_two_link_single_heralded(single(a, b, s), 1.0)), 1e-10);
                EXPECT_NEAR(v, cf_equilibrium_shs(single(b, a, s)), 1e-12);
                if (a < 0.9) EXPECT_LE(v, cf_equilibrium_shs(single(a + 0.1, b, s)));
                if (s < 0.9) EXPECT_LE(v, cf_equilibrium_shs(single(a, b, s + 0.1)));
            }
}

TEST(CfEquilibrium, MultiheraldedMonotone) {
    for (double a : kGrid)
        for (double b : kGrid) {
            const double v = cf_equilibrium_multiheralded(MultiHeraldParams{{a, b}});
            if (a < 0.9) EXPECT_LE(v, cf_equilibrium_multiheralded(MultiHeraldParams{{a + 0.1, b}}));
            if (b < 0.9) EXPECT_LE(v, cf_equilibrium_multiheralded(MultiHeraldParams{{a, b + 0.1}}));
        }
}

TEST(CfLatencyVarianceShs, SpecialCases) {
    EXPECT_NEAR(cf_latency_variance_shs(single(1, 1, 1)), 0.0, 1e-15);
    for (double ps : kGrid) {
        EXPECT_NEAR(cf_latency_variance_shs(single(1, 1, ps)), 4 * (1 - ps) / (ps * ps), 1e-12);
    }
    // Thm.-4 pipeline at one half, frozen: 8/3.
    EXPECT_NEAR(cf_latency_variance_shs(single(0.5, 0.5, 1)), 8.0 / 3.0, 1e-12);
    const auto c = build_two_link_single_heralded(single(0.5, 0.5, 1), 1.0);
    EXPECT_NEAR(hitting_stats(c.matrix(), 4).variance_from(0), 8.0 / 3.0, 1e-12);
    EXPECT_THROW(cf_latency_variance_shs(single(0.5, 0.0, 1)), Error);
}

TEST(CfLatencyVarianceShs, MatchesHittingStats) {
    for (double a : kGrid)
        for (double b : kGrid)
            for (double s : {0.3, 0.6, 1.0}) {
                const auto c = build_two_link_single_heralded(single(a, b, s), 1.0);
                const double expected = hitting_stats(c.matrix(), c.success_state()).variance_from(c.start_state());
                EXPECT_NEAR(cf_latency_variance_shs(single(a, b, s)), expected,
                            1e-9 * std::max(1.0, std::abs(expected)));
            }
}

TEST(CfEquilibriumDhs, SymmetricAndMonotone) {
    for (double a : kGrid)
        for (double b : kGrid) {
            const double v = pi_success(build_two_link_double_heralded(double_heralded(a, b, a, b, 1), 1.0));
            // Exchanging the two links leaves the throughput unchanged.
            const double swapped =
                pi_success(build_two_link_double_heralded(double_heralded(b, 0.6, a, 0.4, 1), 1.0));
            const double original =
                pi_success(build_two_link_double_heralded(double_heralded(a, 0.4, b, 0.6, 1), 1.0));
            EXPECT_NEAR(swapped, original, 1e-12);
            if (a < 0.9) {
                EXPECT_LE(v, pi_success(build_two_link_double_heralded(double_heralded(a + 0.1, b, a, b, 1), 1.0)) +
                                 1e-15);
            }
        }
}
