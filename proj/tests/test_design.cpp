#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hoed/design.hpp"
#include "hoed/errors.hpp"
#include "hoed/models.hpp"
#include "hoed/spectral.hpp"
#include "support.hpp"

using namespace hoed;
using testing::random_matrix;
using testing::random_problem;

namespace {

InverseProblem candidates(int n, int qc, std::uint64_t seed = 1) {
    HeatModelConfig cfg;
    cfg.n = n;
    cfg.sensors = equispaced_sensors(qc, cfg.length);
    return build_problem(cfg, seed).problem;
}

bool better(Criterion c, double a, double b) { return c == Criterion::D ? a > b : a < b; }

std::vector<Eigen::Index> random_subset(Eigen::Index qc, Eigen::Index k, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(qc));
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng(seed, 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace

TEST_CASE("criterion_value on empty and full designs") {
    const InverseProblem p = candidates(32, 6);
    CHECK(criterion_value(p, DesignWeights::none(6), Criterion::D) == 0.0);
    CHECK(criterion_value(p, DesignWeights::none(6), Criterion::A) == doctest::Approx(trace(p.prior().cov())));
    CHECK(criterion_value(p, DesignWeights::all(6), Criterion::D) ==
          doctest::Approx(expected_info_gain(p).value).epsilon(1e-12));
    CHECK(criterion_value(p, DesignWeights::all(6), Criterion::A) ==
          doctest::Approx(bayes_risk(p).value).epsilon(1e-12));
}

TEST_CASE("k = q_c activates every candidate") {
    const InverseProblem p = candidates(32, 5);
    for (Criterion c : {Criterion::D, Criterion::A}) {
        const GreedyResult g = greedy_design(p, 5, c);
        CHECK(g.design.active().size() == 5);
        CHECK(g.steps.back().report.value ==
              doctest::Approx(criterion_value(p, DesignWeights::all(5), c)).epsilon(1e-10));
    }
    const GreedyResult none = greedy_design(p, 0, Criterion::D);
    CHECK(none.steps.empty());
    CHECK(none.design.active().empty());
    CHECK(none.initial_value == 0.0);
    CHECK_THROWS_AS(greedy_design(p, 6, Criterion::D), ParameterError);
}

TEST_CASE("identical candidates tie-break to the lower index") {
    const Space s = testing::random_space(6, 10);
    Matrix g = random_matrix(4, 6, 11);
    g.row(3) = g.row(1);
    Vector noise = Vector::Ones(4);
    noise[0] = 50.0;  // make row 0 unattractive
    noise[2] = 50.0;
    const InverseProblem base = random_problem(6, 4, 10);
    const InverseProblem p(base.prior(), OpExpr::dense(g, s, Space::euclidean(4)), noise);
    for (GreedyUpdate u : {GreedyUpdate::RankOne, GreedyUpdate::Recompute}) {
        for (Criterion c : {Criterion::D, Criterion::A}) {
            CHECK(greedy_design(p, 1, c, u).steps.front().chosen == 1);
        }
    }
}

TEST_CASE("rank-one and recompute paths agree") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const InverseProblem p = candidates(32, 10, 20 + seed);
        for (Criterion c : {Criterion::D, Criterion::A}) {
            const GreedyResult a = greedy_design(p, 6, c, GreedyUpdate::RankOne);
            const GreedyResult b = greedy_design(p, 6, c, GreedyUpdate::Recompute);
            REQUIRE(a.steps.size() == b.steps.size());
            for (std::size_t i = 0; i < a.steps.size(); ++i) {
                CHECK(a.steps[i].chosen == b.steps[i].chosen);
                CHECK(std::abs(a.steps[i].report.value - b.steps[i].report.value) <=
                      1e-8 * std::max(1.0, std::abs(b.steps[i].report.value)));
            }
        }
    }
}

TEST_CASE("greedy trajectories are monotone") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const InverseProblem p = candidates(32, 12, 30 + seed);
        const GreedyResult d = greedy_design(p, 12, Criterion::D);
        double prev = d.initial_value;
        for (const auto& st : d.steps) {
            CHECK(st.monotone);
            CHECK(st.report.value >= prev - 1e-10);
            prev = st.report.value;
        }
        const GreedyResult a = greedy_design(p, 12, Criterion::A);
        prev = a.initial_value;
        for (const auto& st : a.steps) {
            CHECK(st.monotone);
            CHECK(st.report.value <= prev + 1e-10);
            prev = st.report.value;
        }
    }
}

TEST_CASE("adding any candidate to any design is monotone") {
    const InverseProblem p = candidates(32, 8, 40);
    for (std::uint64_t t = 0; t < 10; ++t) {
        const auto base = random_subset(8, 3, 41 + t);
        const DesignWeights w = DesignWeights::subset(8, base);
        const double d0 = criterion_value(p, w, Criterion::D);
        const double a0 = criterion_value(p, w, Criterion::A);
        for (Eigen::Index j = 0; j < 8; ++j) {
            const DesignWeights more = w.with(j, 1.0);
            CHECK(criterion_value(p, more, Criterion::D) >= d0 - 1e-10);
            CHECK(criterion_value(p, more, Criterion::A) <= a0 + 1e-10);
        }
    }
}

TEST_CASE("greedy against random subsets and exhaustive enumeration") {
    const InverseProblem p = candidates(32, 10, 50);
    for (Criterion c : {Criterion::D, Criterion::A}) {
        const GreedyResult g = greedy_design(p, 3, c);
        const double gv = g.steps.back().report.value;
        CHECK(gv == doctest::Approx(criterion_value(p, g.design, c)).epsilon(1e-10));
        for (std::uint64_t t = 0; t < 50; ++t) {
            const double rv = criterion_value(p, DesignWeights::subset(10, random_subset(10, 3, 51 + t)), c);
            CHECK_FALSE(better(c, rv, gv + (c == Criterion::D ? 1e-10 : -1e-10)));
        }
        const ExhaustiveResult ex = exhaustive_design(p, 3, c);
        CHECK(ex.subsets_evaluated == 120);
        CHECK(ex.all_values.size() == 120);
        CHECK(ex.best.size() == 3);
        for (double v : ex.all_values) {
            CHECK_FALSE(better(c, v, ex.best_value));
        }
        const double gap = c == Criterion::D ? ex.best_value - gv : gv - ex.best_value;
        CHECK(gap >= -1e-10);
        MESSAGE(std::string(to_string(c)) << " greedy " << gv << " exhaustive " << ex.best_value << " gap " << gap);
    }
    CHECK_THROWS_AS(exhaustive_design(candidates(32, 16), 2, Criterion::D), ParameterError);
}

TEST_CASE("design weights") {
    CHECK_THROWS_AS(DesignWeights(Vector::Constant(2, 1.5)), ParameterError);
    CHECK_THROWS_AS(DesignWeights(Vector::Constant(2, -0.1)), ParameterError);
    const DesignWeights w = DesignWeights::subset(5, {4, 1});
    CHECK(w.active() == std::vector<Eigen::Index>{1, 4});
    CHECK(w.with(1, 0.0).active() == std::vector<Eigen::Index>{4});
    CHECK_THROWS_AS(DesignWeights::subset(3, {3}), DimensionError);

    // fractional weights scale the effective noise precision
    const InverseProblem p = random_problem(6, 3, 60);
    Vector half = Vector::Constant(3, 0.5);
    const InverseProblem weighted = p.with_design(DesignWeights(half));
    CHECK(expected_info_gain(weighted).value ==
          doctest::Approx(expected_info_gain(p.with_noise_scaled(2.0)).value).epsilon(1e-10));
}
