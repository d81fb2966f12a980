#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <vector>

#include "stodec/decision.hpp"
#include "stodec/oracle.hpp"

using namespace stodec;

namespace {

JointDistribution reference_joint() {
    return JointDistribution::from_rows({{0.4, 0.1}, {0.1, 0.4}});
}

JointDistribution random_joint(RandomStream& rng, int nx, int ny) {
    std::vector<double> entries(static_cast<std::size_t>(nx) * ny);
    double total = 0.0;
    for (auto& v : entries) {
        v = -std::log(1.0 - rng.uniform01());
        total += v;
    }
    for (auto& v : entries) v /= total;
    return JointDistribution(nx, ny, std::move(entries));
}

StochasticRule random_rule(RandomStream& rng, int nx, int ny) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(ny));
    for (auto& row : rows) {
        row.resize(static_cast<std::size_t>(nx));
        double total = 0.0;
        for (auto& v : row) {
            v = -std::log(1.0 - rng.uniform01());
            total += v;
        }
        for (auto& v : row) v /= total;
    }
    return StochasticRule(ConditionalDistribution::from_rows(rows));
}

} // namespace

TEST_CASE("loss factories and flag verification") {
    const auto l01 = LossFunction::zero_one(3);
    CHECK(l01.sup_loss() == 1.0);
    CHECK(l01.flags().nonneg);
    CHECK(l01.flags().zero_iff_equal);
    CHECK(l01.flags().symmetric);
    CHECK(l01.flags().subadditive);
    CHECK(l01(1, 1) == 0.0);
    CHECK(l01(0, 2) == 1.0);

    const auto line = LossFunction::line_metric({0.0, 0.3, 1.0});
    CHECK(line.sup_loss() == doctest::Approx(1.0));
    CHECK(line.flags().subadditive);

    // A declared flag the matrix violates must be rejected.
    CHECK_THROWS_AS(LossFunction(2, {0.0, 1.0, 2.0, 0.0}, LossFlags{true, true, true, false}),
                    std::invalid_argument);
    // Asymmetric matrix: detection must clear the flag.
    const auto asym = LossFunction::from_matrix(2, {0.0, 1.0, 2.0, 0.0});
    CHECK(!asym.flags().symmetric);
    CHECK(asym.flags().nonneg);
}

TEST_CASE("risk of the reference joint under the stated rules") {
    const auto joint = reference_joint();
    const auto loss01 = LossFunction::zero_one(2);
    const auto map = map_rule(joint);
    CHECK(risk(joint, StochasticRule::from_function(map, 2), loss01) ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK(risk(joint, StochasticRule::posterior(joint), loss01) ==
          doctest::Approx(0.32).epsilon(1e-12));
    const auto zero_loss = LossFunction::from_matrix(2, {0.0, 0.0, 0.0, 0.0});
    CHECK(risk(joint, StochasticRule::posterior(joint), zero_loss) == 0.0);
}

TEST_CASE("risk of a point-mass rule equals its deterministic form") {
    RandomStream rng(11);
    for (int it = 0; it < 30; ++it) {
        const int nx = 2 + rng.uniform_int(5);
        const int ny = 2 + rng.uniform_int(5);
        const auto joint = random_joint(rng, nx, ny);
        std::vector<double> anchors(static_cast<std::size_t>(nx));
        for (auto& a : anchors) a = rng.uniform01();
        const auto loss = LossFunction::line_metric(anchors);
        std::vector<int> table(static_cast<std::size_t>(ny));
        for (auto& v : table) v = rng.uniform_int(nx);
        const DeterministicRule f(table);
        CHECK(std::abs(risk(joint, f, loss) -
                       risk(joint, StochasticRule::from_function(f, nx), loss)) <= 1e-12);
        CHECK(std::abs(error_probability(joint, f) -
                       error_probability(joint, StochasticRule::from_function(f, nx))) <=
              1e-12);
    }
}

TEST_CASE("error probability matches risk under 0-1 loss") {
    const auto joint = reference_joint();
    const auto post = StochasticRule::posterior(joint);
    CHECK(error_probability(joint, post) == doctest::Approx(0.32).epsilon(1e-12));
    const auto coupled = JointDistribution::from_rows({{0.5, 0.0}, {0.0, 0.5}});
    CHECK(error_probability(coupled, StochasticRule::posterior(coupled)) == 0.0);
}

TEST_CASE("optimal rules on the reference joint") {
    const auto joint = reference_joint();
    const auto map = map_rule(joint);
    CHECK(map(0) == 0);
    CHECK(map(1) == 1);
    const auto mal = min_avg_loss_rule(joint, LossFunction::zero_one(2));
    CHECK(mal.table() == map.table());
}

TEST_CASE("map rule breaks ties toward the lowest state index") {
    const auto joint = JointDistribution::from_rows({{0.25, 0.25}, {0.25, 0.25}});
    const auto map = map_rule(joint);
    CHECK(map(0) == 0);
    CHECK(map(1) == 0);
}

TEST_CASE("single-state alphabet yields the constant rule") {
    const auto joint = JointDistribution(1, 2, {0.5, 0.5});
    const auto mal = min_avg_loss_rule(joint, LossFunction::zero_one(1));
    CHECK(mal(0) == 0);
    CHECK(mal(1) == 0);
}

TEST_CASE("zero-one loss makes the two optimal rules coincide") {
    RandomStream rng(17);
    for (int it = 0; it < 50; ++it) {
        const int nx = 2 + rng.uniform_int(6);
        const int ny = 2 + rng.uniform_int(6);
        const auto joint = random_joint(rng, nx, ny);
        CHECK(min_avg_loss_rule(joint, LossFunction::zero_one(nx)).table() ==
              map_rule(joint).table());
    }
}

TEST_CASE("optimal rules dominate random rules") {
    RandomStream rng(23);
    for (int it = 0; it < 20; ++it) {
        const auto joint = random_joint(rng, 5, 5);
        const double e_map = error_probability(joint, map_rule(joint));
        std::vector<double> anchors(5);
        for (auto& a : anchors) a = rng.uniform01();
        const auto loss = LossFunction::line_metric(anchors);
        const double r_mal = risk(joint, min_avg_loss_rule(joint, loss), loss);
        for (int r = 0; r < 100; ++r) {
            const auto q = random_rule(rng, 5, 5);
            CHECK(error_probability(joint, q) >= e_map - 1e-12);
            CHECK(risk(joint, q, loss) >= r_mal - 1e-12);
        }
    }
}

TEST_CASE("additive risk bound on the stated cases") {
    const auto joint = reference_joint();
    const auto loss = LossFunction::zero_one(2);
    const auto mal = min_avg_loss_rule(joint, loss);
    const double r_mal = risk(joint, mal, loss);
    // Point mass at the optimum: the transfer term vanishes on the diagonal.
    CHECK(subadditive_risk_bound(joint, StochasticRule::from_function(mal, 2), loss) ==
          doctest::Approx(r_mal).epsilon(1e-12));
    // Posterior sampling with a symmetric loss: exactly twice the optimum.
    CHECK(subadditive_risk_bound(joint, StochasticRule::posterior(joint), loss) ==
          doctest::Approx(2.0 * r_mal).epsilon(1e-12));
}

TEST_CASE("sup-loss risk bound reduces to the miss probability form") {
    const auto joint = reference_joint();
    const auto loss = LossFunction::zero_one(2);
    const auto mal = min_avg_loss_rule(joint, loss);
    CHECK(sup_loss_risk_bound(joint, StochasticRule::from_function(mal, 2), loss) ==
          doctest::Approx(risk(joint, mal, loss)).epsilon(1e-12));
    // Unbounded loss entries are refused.
    const double inf = std::numeric_limits<double>::infinity();
    const auto unbounded = LossFunction::from_matrix(2, {0.0, inf, inf, 0.0});
    CHECK_THROWS_AS(sup_loss_risk_bound(joint, StochasticRule::posterior(joint), unbounded),
                    std::domain_error);
}

TEST_CASE("risk bounds dominate the true risk on random instances") {
    RandomStream rng(31);
    for (int it = 0; it < 40; ++it) {
        const auto joint = random_joint(rng, 4, 4);
        std::vector<double> anchors(4);
        for (auto& a : anchors) a = rng.uniform01();
        for (const auto& loss : {LossFunction::zero_one(4), LossFunction::line_metric(anchors)}) {
            for (int r = 0; r < 20; ++r) {
                const auto q = random_rule(rng, 4, 4);
                const double actual = risk(joint, q, loss);
                CHECK(actual <= subadditive_risk_bound(joint, q, loss) + 1e-12);
                CHECK(actual <= sup_loss_risk_bound(joint, q, loss) + 1e-12);
            }
        }
    }
}

TEST_CASE("two-factor check on the reference joint") {
    const auto report = two_factor_check(reference_joint(), LossFunction::zero_one(2));
    CHECK(report.posterior_sampling_risk == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(report.optimal_risk == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(report.holds);

    const auto coupled = JointDistribution::from_rows({{0.5, 0.0}, {0.0, 0.5}});
    const auto degenerate = two_factor_check(coupled, LossFunction::zero_one(2));
    CHECK(degenerate.posterior_sampling_risk == 0.0);
    CHECK(degenerate.optimal_risk == 0.0);
}

TEST_CASE("two-factor holds for line-metric losses on random instances") {
    RandomStream rng(37);
    for (int it = 0; it < 50; ++it) {
        const auto joint = random_joint(rng, 5, 5);
        std::vector<double> anchors(5);
        for (auto& a : anchors) a = rng.uniform01();
        CHECK(two_factor_check(joint, LossFunction::line_metric(anchors)).holds);
    }
}

TEST_CASE("approximation gap bound on the stated case") {
    const auto joint = reference_joint();
    const auto loss = LossFunction::zero_one(2);
    const auto post = StochasticRule::posterior(joint);
    const auto map_pm = StochasticRule::from_function(map_rule(joint), 2);
    const double bound = approximation_gap_bound(joint, post, map_pm, loss);
    CHECK(bound == doctest::Approx(0.2).epsilon(1e-12));
    const double gap = std::abs(risk(joint, post, loss) - risk(joint, map_pm, loss));
    CHECK(gap == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(gap <= bound + 1e-12);
    CHECK(approximation_gap_bound(joint, post, post, loss) == 0.0);
}

TEST_CASE("approximation gap bound holds on random rule pairs") {
    RandomStream rng(41);
    for (int it = 0; it < 40; ++it) {
        const auto joint = random_joint(rng, 4, 6);
        std::vector<double> anchors(4);
        for (auto& a : anchors) a = rng.uniform01();
        const auto loss = LossFunction::line_metric(anchors);
        const auto qa = random_rule(rng, 4, 6);
        const auto qb = random_rule(rng, 4, 6);
        CHECK(std::abs(risk(joint, qa, loss) - risk(joint, qb, loss)) <=
              approximation_gap_bound(joint, qa, qb, loss) + 1e-12);
    }
}

TEST_CASE("posterior sampling errs at most twice any rule") {
    const auto joint = reference_joint();
    const auto vs_map =
        posterior_vs_any_rule_check(joint, StochasticRule::from_function(map_rule(joint), 2));
    CHECK(vs_map.posterior_error == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(vs_map.rule_error == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(vs_map.holds);
    CHECK(posterior_vs_any_rule_check(joint, StochasticRule::posterior(joint)).holds);

    RandomStream rng(43);
    for (int it = 0; it < 10; ++it) {
        const auto j = random_joint(rng, 6, 6);
        for (int r = 0; r < 100; ++r)
            CHECK(posterior_vs_any_rule_check(j, random_rule(rng, 6, 6)).holds);
    }
}

TEST_CASE("tightness construction: the doubled-error identity") {
    // Binary-state algebra: with q0 = p0^2 / (2 p0 - 1), twice the error
    // of the (improper) rule equals the posterior-sampling error.  The
    // rule is not a distribution for p0 < 1, so this stays raw algebra.
    RandomStream rng(47);
    for (int it = 0; it < 30; ++it) {
        const int ny = 2 + rng.uniform_int(4);
        std::vector<std::vector<double>> rows(2, std::vector<double>(ny));
        std::vector<double> p0(static_cast<std::size_t>(ny));
        std::vector<double> py(static_cast<std::size_t>(ny));
        double total = 0.0;
        for (int y = 0; y < ny; ++y) {
            py[static_cast<std::size_t>(y)] = 0.1 + rng.uniform01();
            total += py[static_cast<std::size_t>(y)];
        }
        for (auto& v : py) v /= total;
        for (int y = 0; y < ny; ++y) {
            p0[static_cast<std::size_t>(y)] = 0.5 + 0.5 * rng.uniform01() * 0.98 + 0.005;
            rows[0][static_cast<std::size_t>(y)] = p0[static_cast<std::size_t>(y)] * py[static_cast<std::size_t>(y)];
            rows[1][static_cast<std::size_t>(y)] =
                (1.0 - p0[static_cast<std::size_t>(y)]) * py[static_cast<std::size_t>(y)];
        }
        const auto joint = JointDistribution::from_rows(rows);
        const double posterior_error =
            error_probability(joint, StochasticRule::posterior(joint));
        double doubled_rule_error = 0.0;
        for (int y = 0; y < ny; ++y) {
            const double p = p0[static_cast<std::size_t>(y)];
            const double q0 = p * p / (2.0 * p - 1.0);
            doubled_rule_error +=
                2.0 * py[static_cast<std::size_t>(y)] * (p * (1.0 - q0) + (1.0 - p) * q0);
        }
        CHECK(std::abs(posterior_error - doubled_rule_error) <= 1e-9);
    }
}

TEST_CASE("brute-force optimal error agrees with the rule-based route") {
    CHECK(exact_map_error(reference_joint()) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(exact_map_error(JointDistribution::from_rows({{0.5, 0.0}, {0.0, 0.5}})) == 0.0);
    RandomStream rng(67);
    for (int it = 0; it < 30; ++it) {
        const auto joint = random_joint(rng, 2 + rng.uniform_int(6), 2 + rng.uniform_int(6));
        CHECK(std::abs(exact_map_error(joint) -
                       error_probability(joint, map_rule(joint))) <= 1e-12);
    }
}

TEST_CASE("pooled decision picks the best sampled state") {
    const auto dec = decompose(reference_joint());
    const std::vector<int> both = {1, 0};
    CHECK(sequence_decide(0, both, dec) == 0);
    const std::vector<int> single = {1};
    CHECK(sequence_decide(0, single, dec) == 1);
    const std::vector<int> repeated = {1, 1};
    CHECK(sequence_decide(0, repeated, dec) == 1);
    CHECK_THROWS_AS(sequence_decide(0, std::vector<int>{}, dec), std::invalid_argument);
    // Generic-loss variant agrees under 0-1 loss.
    const auto loss = LossFunction::zero_one(2);
    CHECK(sequence_decide(0, both, dec, loss) == 0);
    CHECK(sequence_decide(1, both, dec, loss) == 1);
    // Posterior ties break toward the lowest state index.
    const auto flat = decompose(JointDistribution::from_rows({{0.25, 0.25}, {0.25, 0.25}}));
    CHECK(sequence_decide(0, both, flat) == 0);
    CHECK(sequence_decide(0, std::vector<int>{1, 1}, flat) == 1);
}

TEST_CASE("pooled decision on a zero-mass observation is refused") {
    const auto dec = decompose(JointDistribution::from_rows({{0.6, 0.0}, {0.4, 0.0}}));
    const std::vector<int> samples = {0};
    CHECK_THROWS_AS(sequence_decide(1, samples, dec), std::invalid_argument);
}

TEST_CASE("exact pooled error on the reference joint") {
    const auto joint = reference_joint();
    const SequenceDecisionConfig cfg{2, StochasticRule::posterior(joint)};
    CHECK(sequence_error_exact(joint, cfg) == doctest::Approx(0.224).epsilon(1e-12));
    const SequenceDecisionConfig one{1, StochasticRule::posterior(joint)};
    CHECK(sequence_error_exact(joint, one) ==
          doctest::Approx(error_probability(joint, StochasticRule::posterior(joint)))
              .epsilon(1e-12));
}

TEST_CASE("exact pooled error is non-increasing in the pool size") {
    const auto joint = reference_joint();
    double prev = 1.0;
    for (int t = 1; t <= 5; ++t) {
        const double e = sequence_error_exact(joint, {t, StochasticRule::posterior(joint)});
        CHECK(e <= prev + 1e-12);
        prev = e;
    }
}

TEST_CASE("independent oracle agrees with the pooled-error enumeration") {
    RandomStream rng(53);
    for (int it = 0; it < 20; ++it) {
        const auto joint = random_joint(rng, 3, 4);
        const auto proposal = random_rule(rng, 3, 4);
        for (int t = 1; t <= 3; ++t) {
            const double via_decision = sequence_error_exact(joint, {t, proposal});
            const double via_oracle = exact_sequence_error(joint, proposal, t);
            CHECK(std::abs(via_decision - via_oracle) <= 1e-12);
        }
    }
}

TEST_CASE("iid bound values on the reference joint") {
    const auto joint = reference_joint();
    const SequenceDecisionConfig cfg{2, StochasticRule::posterior(joint)};
    const auto bound = iid_sequence_bound(joint, cfg);
    CHECK(bound.per_observation == doctest::Approx(0.24).epsilon(1e-12));
    CHECK(sequence_error_exact(joint, cfg) <= bound.per_observation + 1e-12);
    // Pool of one reduces to the sup-loss bound.
    const SequenceDecisionConfig one{1, StochasticRule::posterior(joint)};
    CHECK(iid_sequence_bound(joint, one).per_observation ==
          doctest::Approx(sup_loss_risk_bound(joint, StochasticRule::posterior(joint),
                                              LossFunction::zero_one(2)))
              .epsilon(1e-12));
}

TEST_CASE("weak bound forms are ordered on random joints") {
    RandomStream rng(59);
    for (int it = 0; it < 30; ++it) {
        const auto joint = random_joint(rng, 4, 5);
        for (int t = 1; t <= 4; ++t) {
            const auto bound =
                iid_sequence_bound(joint, {t, StochasticRule::posterior(joint)});
            CHECK(bound.per_observation <= bound.worst_observation + 1e-12);
            CHECK(bound.worst_observation <= bound.alphabet + 1e-12);
            CHECK(sequence_error_exact(joint, {t, StochasticRule::posterior(joint)}) <=
                  bound.per_observation + 1e-12);
        }
    }
}

TEST_CASE("pooled risk never beats the best per-step marginal") {
    RandomStream rng(61);
    for (int it = 0; it < 20; ++it) {
        const auto joint = random_joint(rng, 3, 3);
        // Mixed pool: two distinct proposals.
        const std::vector<StochasticRule> steps = {random_rule(rng, 3, 3),
                                                   random_rule(rng, 3, 3)};
        const auto report = sequence_marginal_bound_check(joint, steps);
        CHECK(report.holds);
        CHECK(report.best_marginal ==
              doctest::Approx(std::min(report.marginal_risks[0], report.marginal_risks[1])));
        std::vector<double> anchors = {0.0, rng.uniform01(), 1.0};
        const auto loss = LossFunction::line_metric(anchors);
        CHECK(sequence_marginal_bound_check(joint, steps, &loss).holds);
    }
    // Identical pool of one: equality with the proposal's error.
    const auto joint = reference_joint();
    const auto post = StochasticRule::posterior(joint);
    const auto single = sequence_marginal_bound_check(joint, {post});
    CHECK(single.sequence_risk == doctest::Approx(single.best_marginal).epsilon(1e-12));
}
