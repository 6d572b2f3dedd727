#include "avglearn/certify.hpp"

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace avglearn;

TEST_CASE("time-invariant certificates") {
    SUBCASE("anchored golden pair decays via the nonnegative rule") {
        const auto report =
            certify_time_invariant(fixtures::golden5(), fixtures::golden5_rates_anchored());
        CHECK(report.verdict == Verdict::ZeroConvergent);
        CHECK(report.fired_rule == "nonnegative_anchoring_equivalence");
        CHECK(report.anchor_set == std::vector<int>{0});
    }
    SUBCASE("unanchored golden pair is decisively negative") {
        const auto report =
            certify_time_invariant(fixtures::golden5(), fixtures::golden5_rates_unanchored());
        CHECK(report.verdict == Verdict::NotZeroConvergent);
        CHECK(report.fired_rule == "nonnegative_anchoring_equivalence");
    }
    SUBCASE("anchorless pair still certified by the spectral fallback") {
        const auto report = certify_time_invariant(fixtures::no_anchor_a(), fixtures::no_anchor_rates());
        CHECK(report.verdict == Verdict::ZeroConvergent);
        CHECK(report.fired_rule == "spectral_fallback");
        CHECK(report.witnesses.at("rho") < 0.83);
        CHECK(report.anchor_set.empty());
    }
    SUBCASE("extreme rate ratio certified by the spectral fallback") {
        const auto report = certify_time_invariant(fixtures::extreme_a(), fixtures::extreme_rates());
        CHECK(report.verdict == Verdict::ZeroConvergent);
        CHECK(report.witnesses.at("rho") < 0.95);
    }
    SUBCASE("all anchors fire the contraction rule") {
        const Matrix a{{0.5, 0.5}, {0.25, 0.75}};
        const auto report = certify_time_invariant(a, LearningRates{0.5, 0.75});
        CHECK(report.verdict == Verdict::ConvergesToTruth);
        CHECK(report.fired_rule == "all_anchors_contraction");
        CHECK(report.witnesses.at("inf_norm") < 1.0);
    }
    SUBCASE("closed-interval anchoring handles negative diagonals") {
        // Agent 2 at the closed boundary E = 2A(2,2), agent 1 a genuine anchor.
        const Matrix a{{0.5, 0.5}, {0.75, 0.25}};
        const auto report = certify_time_invariant(a, LearningRates{0.25, 0.5});
        CHECK(report.verdict == Verdict::ZeroConvergent);
        CHECK(report.fired_rule == "closed_interval_anchoring");
    }
    SUBCASE("soundness against the independent power-limit verdict") {
        const CounterRng rng(31);
        int checked = 0;
        for (std::uint64_t id = 0; id < 250; ++id) {
            const int n = 2 + static_cast<int>(id % 6);
            const Matrix a = oracles::random_row_stochastic(rng, id, n, 0.4);
            LearningRates e(n);
            for (int i = 0; i < n; ++i) {
                const double u = rng.uniform(id, 50, i, 0);
                if (u < 0.4) continue;
                if (u < 0.8)
                    e.set(i, rng.uniform(id, 51, i, 0) * 2.0 * a(i, i));
                else
                    e.set(i, 2.0 * a(i, i) + rng.uniform(id, 52, i, 0));
            }
            const auto report = certify_time_invariant(a, e);
            if (report.verdict == Verdict::Inconclusive) continue;
            if (report.verdict == Verdict::ConvergesToTruth) continue;
            const double rho = spectral_radius(subtract_rates(a, e));
            const auto power = matrix_power_limit(subtract_rates(a, e), 1e-9, 300000);
            if (report.verdict == Verdict::ZeroConvergent && rho < 1.0 - 1e-3) {
                CHECK(power.kind == PowerLimitKind::ZeroConvergent);
                ++checked;
            }
            if (report.verdict == Verdict::NotZeroConvergent) {
                CHECK(power.kind != PowerLimitKind::ZeroConvergent);
                ++checked;
            }
        }
        CHECK(checked > 120);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(certify_time_invariant(fixtures::contraction4(), LearningRates(4)),
                        InvalidScenario);
    }
    SUBCASE("triangular shift family: verdict matches the diagonal criterion") {
        // A(1,1) = 1 and A(i,i-1) = 1 make B triangular, so B is
        // zero-convergent iff 0 < E(1) < 2 and E(i) < 1 for i >= 2.
        const CounterRng rng(36);
        for (std::uint64_t id = 0; id < 120; ++id) {
            const int n = 2 + static_cast<int>(id % 4);
            Matrix a(n);
            a.set(0, 0, 1.0);
            for (int i = 1; i < n; ++i) a.set(i, i - 1, 1.0);
            LearningRates e(n);
            e.set(0, 2.4 * rng.uniform(id, 53, 0, 0));
            for (int i = 1; i < n; ++i) e.set(i, 1.4 * rng.uniform(id, 53, i, 0));
            bool expect_zero = e(0) > 0.0 && e(0) < 2.0;
            for (int i = 1; i < n; ++i) expect_zero = expect_zero && e(i) < 1.0;
            double margin = std::min(std::abs(e(0) - 2.0), std::abs(e(0)));
            for (int i = 1; i < n; ++i) margin = std::min(margin, std::abs(e(i) - 1.0));
            if (margin < 1e-6) continue;  // spectral boundary
            const auto report = certify_time_invariant(a, e);
            if (expect_zero)
                CHECK((report.verdict == Verdict::ZeroConvergent ||
                       report.verdict == Verdict::ConvergesToTruth));
            else
                CHECK(report.verdict == Verdict::NotZeroConvergent);
        }
    }
}

TEST_CASE("impaired averaging certificates") {
    SUBCASE("contraction example decays") {
        const auto report = certify_impaired(fixtures::contraction4());
        CHECK(report.verdict == Verdict::ZeroConvergent);
        CHECK(report.anchor_set == std::vector<int>{3});
        CHECK(report.witnesses.at("contraction_index") == 3.0);
    }
    SUBCASE("uniformly deficient diagonal decays") {
        Matrix half = Matrix::zero(3);
        for (int i = 0; i < 3; ++i) half.set(i, i, 0.5);
        CHECK(certify_impaired(half).verdict == Verdict::ZeroConvergent);
    }
    SUBCASE("stochastic sink behind a deficient row does not decay") {
        // Row 1 is deficient but the sink {2,3} keeps full mass.
        const Matrix b{{0.25, 0.5, 0.0}, {0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
        const auto report = certify_impaired(b);
        CHECK(report.verdict == Verdict::NotZeroConvergent);
        CHECK(oracles::spectral_radius_oracle(b) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("row-stochastic input is rejected") {
        CHECK_THROWS_AS(certify_impaired(fixtures::golden5()), NotProperSubstochastic);
        CHECK_THROWS_AS(certify_impaired(Matrix{{0.9, 0.3}, {0.1, 0.2}}), NotSubstochastic);
    }
}

TEST_CASE("vanishing-rates certificates") {
    SUBCASE("harmonic split family") {
        const auto report = certify_vanishing_rates(ScheduleWindow::harmonic_split(2, 60));
        CHECK(report.verdict == Verdict::ConvergesToTruth);
        CHECK(report.fired_rule == "vanishing_rates_persistence");
        CHECK(report.witnesses.at("T1") == 2.0);
        CHECK(report.witnesses.at("product_bound") > 0.0);
        CHECK(report.witnesses.at("product_bound") < 1.0);
    }
    SUBCASE("logarithmic tail family") {
        const auto report = certify_vanishing_rates(ScheduleWindow::tail_log(80, 10, 0.5));
        CHECK(report.verdict == Verdict::ConvergesToTruth);
        CHECK(report.witnesses.at("T1") == 0.0);
    }
    SUBCASE("geometric rates are flagged, not certified") {
        std::vector<Matrix> as;
        std::vector<LearningRates> es;
        for (int t = 0; t < 30; ++t) {
            as.push_back(Matrix::identity(2));
            const double rate = std::ldexp(1.0, -t - 1);
            es.push_back(LearningRates{rate, rate});
        }
        const auto report = certify_vanishing_rates(ScheduleWindow::sequence(std::move(as), std::move(es)));
        CHECK(report.verdict == Verdict::Inconclusive);
        CHECK(report.witnesses.contains("geometric_ratio"));
        CHECK(report.witnesses.at("geometric_ratio") == doctest::Approx(0.5));
        CHECK(report.witnesses.at("partial_sum_min_rates") < 2.0);
        CHECK(report.notes.find("converges") != std::string::npos);
    }
    SUBCASE("constant positive rates fail the vanishing condition") {
        const auto report = certify_vanishing_rates(
            ScheduleWindow::constant(Matrix::identity(2), LearningRates{0.5, 0.5}, 20));
        CHECK(report.verdict == Verdict::Inconclusive);
    }
}

TEST_CASE("mixed-norm certificates") {
    SUBCASE("drifting two-agent family") {
        const auto report = certify_mixed_norm(ScheduleWindow::example34(50));
        CHECK(report.verdict == Verdict::ConvergesToTruth);
        CHECK(report.fired_rule == "mixed_norm_recognized_family");
        CHECK(report.witnesses.at("tau_first") == doctest::Approx(0.5).epsilon(1e-14));
        // tau'_t = t / (2t + 3)
        CHECK(report.witnesses.at("tau_prime_last") == doctest::Approx(49.0 / 101.0).epsilon(1e-12));
        const double p_even = report.witnesses.at("two_step_product_even");
        double expected = 1.0;
        for (long s = 0; 2 * s + 1 < 50; ++s) expected *= 1.0 - 1.0 / (4.0 * s + 6.0);
        CHECK(p_even == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("two-step factors dominate the direct product norms") {
        const ScheduleWindow w = ScheduleWindow::example34(40);
        std::vector<MixedNormStep> steps;
        for (long t = 0; t < 40; ++t) {
            const auto p = w.at(t);
            steps.push_back(mixed_norm_step(p.a, p.e));
        }
        for (long t = 0; t + 1 < 40; ++t) {
            const double direct = induced_norm(w.b_at(t + 1) * w.b_at(t), PNorm::Infinity);
            CHECK(direct <= (2.0 - steps[t].tau) / (2.0 - steps[t + 1].tau_prime) + 1e-12);
        }
    }
    SUBCASE("constant schedule with window-wide bounds") {
        const Matrix a{{0.5, 0.5}, {0.5, 0.5}};
        const auto report =
            certify_mixed_norm(ScheduleWindow::constant(a, LearningRates{0.25, 0.25}, 10));
        CHECK(report.verdict == Verdict::ConvergesToTruth);
        CHECK(report.fired_rule == "mixed_norm_constant_bounds");
        CHECK(report.witnesses.at("gamma0") == doctest::Approx(0.0));
        CHECK(report.witnesses.at("gamma1") == doctest::Approx(0.5));
        CHECK(report.witnesses.at("geometric_factor") == doctest::Approx(0.75));
    }
    SUBCASE("zero learning mass reports the failing step") {
        const auto report = certify_mixed_norm(
            ScheduleWindow::constant(fixtures::golden5(), LearningRates(5), 10));
        CHECK(report.verdict == Verdict::Inconclusive);
        CHECK(report.witnesses.at("failing_t") == 0.0);
        CHECK(report.notes.find("step 0") != std::string::npos);
    }
}

TEST_CASE("high-ratio family") {
    SUBCASE("two agents") {
        const auto fam = build_high_ratio_example(2);
        const double r = std::sqrt(5.0 / 8.0);
        REQUIRE(fam.predicted_eigs.size() == 2);
        CHECK(fam.e(0) == doctest::Approx(0.75));
        const double rho = spectral_radius(subtract_rates(fam.a, fam.e));
        CHECK(rho == doctest::Approx(r).epsilon(1e-10));
        CHECK(rho == doctest::Approx(0.7906).epsilon(1e-3));
    }
    SUBCASE("closed-form spectrum for n = 2..10") {
        for (int n = 2; n <= 10; ++n) {
            const auto fam = build_high_ratio_example(n);
            CHECK(fam.a.row_class() == RowClass::RowStochastic);
            CHECK(fam.e(0) == doctest::Approx((n * n - n + 1.0) / (n * n)).epsilon(1e-14));
            auto actual = eigenvalues(subtract_rates(fam.a, fam.e));
            for (const auto& want : fam.predicted_eigs) {
                double best = 1e9;
                std::size_t best_k = 0;
                for (std::size_t k = 0; k < actual.size(); ++k) {
                    if (std::abs(actual[k] - want) < best) {
                        best = std::abs(actual[k] - want);
                        best_k = k;
                    }
                }
                CHECK(best < 1e-8);
                actual.erase(actual.begin() + best_k);
            }
            CHECK(spectral_radius(subtract_rates(fam.a, fam.e)) < 1.0);
        }
    }
    SUBCASE("three agents keep the shifted zero eigenvalue") {
        const auto fam = build_high_ratio_example(3);
        int near_third = 0;
        for (const auto& lambda : eigenvalues(subtract_rates(fam.a, fam.e)))
            if (std::abs(lambda - std::complex<double>(1.0 / 3.0, 0.0)) < 1e-9) ++near_third;
        CHECK(near_third == 1);
    }
}

TEST_CASE("one-learner bounds") {
    SUBCASE("uniform matrix") {
        for (int n : {3, 4, 5}) {
            Matrix a(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a.set(i, j, 1.0 / n);
            const auto out = one_learner_bounds(a, 0, 0.2, 0.1);
            CHECK(out.ahat_norm == doctest::Approx(1.0 / n).epsilon(1e-14));
            // r(1/n) = 1/n exactly, and the norm branch gives 1/n as well.
            CHECK(out.upper == doctest::Approx(1.0 / n).epsilon(1e-12));
            CHECK(out.ahat_norm_ge_inv_n);
        }
    }
    SUBCASE("large off-learner entry fails the smallness test") {
        const Matrix a{{0.4, 0.3, 0.3}, {0.6, 0.2, 0.2}, {0.2, 0.2, 0.6}};
        const auto out = one_learner_bounds(a, 0, 0.3, 0.0);
        CHECK_FALSE(out.smallness_ok);  // entries >= 1/(n-1) = 0.5 exist
    }
    SUBCASE("zero self-belief is infeasible") {
        const Matrix a{{0.0, 1.0}, {0.5, 0.5}};
        CHECK_THROWS_AS(one_learner_bounds(a, 0, 0.4, 0.1), InfeasibleLearner);
    }
    SUBCASE("parameter validation") {
        const Matrix a{{0.5, 0.5}, {0.5, 0.5}};
        CHECK_THROWS_AS(one_learner_bounds(a, 0, 0.1, 0.4), InvalidInput);
    }
}

TEST_CASE("extremal lower bound and thresholds") {
    CHECK(fn_lower_bound(1, 4.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(fn_lower_bound(3, 0.0) == 0.0);
    CHECK(fn_lower_bound(2, 6.5) >= 1.0);

    CHECK(fn_threshold(1).exact == doctest::Approx(2.0));
    CHECK(fn_threshold(2).exact == doctest::Approx(6.5));
    CHECK(fn_threshold(3).exact == doctest::Approx(16.0));
    for (int n = 1; n <= 20; ++n) {
        const auto t = fn_threshold(n);
        CHECK(t.exact <= t.simple);
        if (n <= 4) {
            CHECK(fn_lower_bound(n, t.exact) >= 1.0 - 1e-12);
            CHECK(fn_lower_bound(n, t.exact + 0.5) > 1.0);
            CHECK(fn_lower_bound(n, t.exact * 1.01) > 1.0);
        }
    }

    CHECK(fn_small_exact(1, 0.5) == 0.0);
    CHECK(fn_small_exact(2, 3.0) == 2.0);
    CHECK(fn_small_exact(2, 1.0) == 0.0);
    CHECK_THROWS_AS(fn_small_exact(3, 2.0), Unsupported);
}

TEST_CASE("extremal search") {
    SUBCASE("scalar case recovers the exact value") {
        const auto result = fn_empirical({1, 4.0, 4000}, 99);
        CHECK(result.best_rho == doctest::Approx(3.0).epsilon(1e-6));
        CHECK(result.best_e(0) == 4.0);
    }
    SUBCASE("two agents approach the exact extremal value") {
        for (double R : {1.5, 3.0}) {
            const auto result = fn_empirical({2, R, 30000}, 7);
            CHECK(result.best_rho >= fn_small_exact(2, R) - 1e-9);
            CHECK(result.best_rho <= fn_small_exact(2, R) + 1e-3);
        }
    }
    SUBCASE("always dominated below by the perturbation bound") {
        const CounterRng rng(33);
        for (std::uint64_t id = 0; id < 10; ++id) {
            const int n = 1 + static_cast<int>(id % 3);
            const double R = 0.5 + 4.0 * rng.uniform(id, 60, 0, 0);
            const auto result = fn_empirical({n, R, 2500}, id);
            CHECK(result.best_rho >= fn_lower_bound(n, R) - 1e-9);
            CHECK(result.best_a.row_class(1e-9) != RowClass::General);
        }
    }
}

TEST_CASE("spectral variation bound") {
    SUBCASE("identical matrices") {
        const Matrix a = fixtures::golden5();
        const auto out = oe_infty_check(a, a);
        CHECK(out.s_a_of_b == 0.0);
        CHECK(out.bound == 0.0);
        CHECK(out.holds);
    }
    SUBCASE("rank-one diagonal perturbation") {
        const double R = 2.5;
        Matrix b = Matrix::zero(3);
        b.set(0, 0, -R);
        const auto out = oe_infty_check(Matrix::zero(3), b);
        CHECK(out.s_a_of_b == doctest::Approx(R));
        CHECK(out.bound == doctest::Approx(std::pow(3.0, 1.0 / 3.0) * R).epsilon(1e-12));
        CHECK(out.holds);
    }
    SUBCASE("random pairs always satisfy the bound") {
        const CounterRng rng(34);
        for (std::uint64_t id = 0; id < 500; ++id) {
            const int n = 2 + static_cast<int>(id % 5);
            Matrix a(n), b(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    a.set(i, j, 2.0 * rng.uniform(id, 61, i, j) - 1.0);
                    b.set(i, j, a(i, j) + 0.5 * (2.0 * rng.uniform(id, 62, i, j) - 1.0));
                }
            CHECK(oe_infty_check(a, b).holds);
        }
    }
}

TEST_CASE("symmetric overlearning") {
    SUBCASE("identity with a rate of two sits exactly at the boundary") {
        const auto report = symmetric_overlearning_check(Matrix::identity(2), LearningRates{2.0, 0.0});
        CHECK(report.verdict == Verdict::NotZeroConvergent);
        CHECK(report.witnesses.at("min_eigenvalue") == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(report.witnesses.at("rho") == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("random symmetric instances obey the eigenvalue shift") {
        const CounterRng rng(35);
        for (std::uint64_t id = 0; id < 200; ++id) {
            const int n = 2 + static_cast<int>(id % 5);
            const Matrix a = oracles::random_symmetric_stochastic(rng, id, n);
            LearningRates e(n);
            e.set(static_cast<int>(id) % n, 2.0 + 2.0 * rng.uniform(id, 63, 0, 0));
            const auto report = symmetric_overlearning_check(a, e);
            CHECK(report.verdict == Verdict::NotZeroConvergent);
            CHECK(report.witnesses.at("min_eigenvalue") <= -1.0 + 1e-9);
            CHECK(report.witnesses.at("rho") >= 1.0 - 1e-9);
        }
    }
    SUBCASE("asymmetric counterexample is rejected as not applicable") {
        CHECK_THROWS_AS(symmetric_overlearning_check(fixtures::asym3(), fixtures::asym3_rates()),
                        NotApplicable);
        // The same pair is genuinely contractive, confirming why symmetry matters.
        CHECK(spectral_radius(subtract_rates(fixtures::asym3(), fixtures::asym3_rates())) < 0.92);
    }
}
