#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stodec/gf.hpp"
#include "stodec/prob.hpp"

namespace stodec {

enum class Schedule {
    exact_two_pass, // two sweeps over each tree component; falls back to
                    // flooding when the active graph has a loop
    flooding,
};

struct ScheduleConfig {
    Schedule mode = Schedule::exact_two_pass;
    int max_iterations = 50;
    double convergence_epsilon = 1e-8;
    double damping = 0.0; // in [0, 1)
};

struct MarginalResult {
    std::optional<FiniteDistribution> marginal; // nullopt: zero total mass
    bool exact = false;     // two-pass ran on a loop-free active graph
    bool converged = true;  // flooding met the epsilon test
    int iterations = 0;
};

// Factor graph of a constrained block: one variable per position with
// its channel prior, one factor per check row.  Sampling a position
// substitutes its value into the incident checks, shrinking their
// scopes; a check whose scope empties is retired after a consistency
// test.  The graph seen by message passing is always the active
// (unfrozen) part.
class FactorGraph {
  public:
    FactorGraph(const SparseCheckMatrix& A, std::span<const int> target,
                std::vector<FiniteDistribution> priors);

    int variable_count() const { return n_; }
    int field_order() const { return q_; }
    bool frozen(int var) const { return frozen_[static_cast<std::size_t>(var)] >= 0; }
    int frozen_value(int var) const { return frozen_[static_cast<std::size_t>(var)]; }
    bool contradiction() const { return contradiction_; }

    // Substitutes a value; returns false when a retiring check demands a
    // different constant (the remaining coset is empty).
    bool freeze(int var, int value);

    // Approximate marginal of an unfrozen variable under the active
    // graph; exact for two-pass on forests.
    MarginalResult marginal(int var, const ScheduleConfig& cfg) const;

  private:
    struct Check {
        std::vector<CheckEntry> scope;
        int residual;
        bool retired = false;
    };

    int n_;
    int q_;
    PrimeField field_;
    std::vector<std::vector<double>> priors_;
    std::vector<Check> checks_;
    std::vector<std::vector<int>> var_checks_; // static incidence lists
    std::vector<int> frozen_;                  // -1 = unfrozen
    bool contradiction_ = false;
};

struct CrngDraw {
    std::vector<int> x;
    bool exact = true;     // every step used an exact two-pass marginal
    bool converged = true; // no step hit the iteration cap
};

// Sequential constrained sampler: walks the positions in order,
// computing each conditional given the frozen prefix by sum-product and
// sampling from it.  The output always satisfies A x = target; nullopt
// means some step found zero candidate mass.
std::optional<CrngDraw> crng_sample(const SparseCheckMatrix& A, std::span<const int> target,
                                    const std::vector<FiniteDistribution>& priors,
                                    const ScheduleConfig& cfg, RandomStream& rng);

// Brute-force counterpart of one sequential step: the conditional of
// x_position given the prefix, by direct summation over suffixes.
// Throws when q^(n - position) exceeds max_terms; nullopt on zero mass.
std::optional<FiniteDistribution> crng_exact_stepwise(
    const SparseCheckMatrix& A, std::span<const int> target,
    const std::vector<FiniteDistribution>& priors, int position,
    std::span<const int> prefix, std::uint64_t max_terms = 10'000'000);

} // namespace stodec
