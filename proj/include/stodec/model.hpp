#pragma once

#include <span>
#include <vector>

#include "stodec/prob.hpp"

namespace stodec {

// Memoryless product model of a state/observation block: one joint law
// per position.  Positions with a trivial one-symbol observation
// alphabet model unobserved sources.
class SourceModel {
  public:
    explicit SourceModel(std::vector<JointDistribution> position_laws);

    // Same per-position joint law at every position.
    static SourceModel iid(const JointDistribution& per_position, int length);

    // Unobserved i.i.d. source: observation alphabet of size one.
    static SourceModel iid_prior(const FiniteDistribution& prior, int length);

    // Channel view: per-position law prior(x) * channel(y|x), with
    // channel rows indexed by the input symbol.
    static SourceModel from_prior_and_channel(const FiniteDistribution& prior,
                                              const std::vector<FiniteDistribution>& channel_rows,
                                              int length);

    // Binary symmetric side channel with the given flip probability.
    static SourceModel binary_symmetric(double flip_prob, int length);

    int length() const { return static_cast<int>(laws_.size()); }
    int state_alphabet() const { return laws_.front().state_count(); }
    int obs_alphabet() const { return laws_.front().obs_count(); }
    const JointDistribution& position_law(int j) const {
        return laws_[static_cast<std::size_t>(j)];
    }

    // Per-position posteriors mu_{X_j|Y_j}(.|y_j); throws when some y_j
    // has zero marginal mass.
    std::vector<FiniteDistribution> posteriors_given(std::span<const int> obs) const;

    // Per-position state marginals (the priors of an unobserved model).
    std::vector<FiniteDistribution> state_marginals() const;

    // log prod_j mu_{X_j|Y_j}(x_j|y_j); -infinity on zero mass.
    double log_conditional_mass(std::span<const int> x, std::span<const int> obs) const;

    // Draws (x, y) from the product law.
    void draw_pair(RandomStream& rng, std::vector<int>& x, std::vector<int>& obs) const;

  private:
    std::vector<JointDistribution> laws_;
};

} // namespace stodec
