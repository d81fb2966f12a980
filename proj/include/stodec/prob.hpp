#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stodec/rng.hpp"

namespace stodec {

// Validation tolerance for user-supplied probabilities.
inline constexpr double kProbTolerance = 1e-9;

// Probability distribution on a finite alphabet {0, ..., size-1}.
// Immutable after construction; entries are validated to be nonnegative
// and to sum to one within kProbTolerance.
class FiniteDistribution {
  public:
    explicit FiniteDistribution(std::vector<double> probs);

    static FiniteDistribution point_mass(int symbol, int size);
    static FiniteDistribution uniform(int size);

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& probs() const { return p_; }

  private:
    std::vector<double> p_;
};

// Joint law of a state/observation pair on finite alphabets.
// Entry (x, y) is the probability of state x together with observation y.
class JointDistribution {
  public:
    JointDistribution(int state_count, int obs_count, std::vector<double> entries);

    // Convenience constructor from per-state rows.
    static JointDistribution from_rows(const std::vector<std::vector<double>>& rows);

    int state_count() const { return nx_; }
    int obs_count() const { return ny_; }
    double operator()(int x, int y) const {
        return m_[static_cast<std::size_t>(x) * ny_ + y];
    }

  private:
    int nx_;
    int ny_;
    std::vector<double> m_;
};

// Family of distributions over the state alphabet, one row per
// observation symbol.  Rows conditioned on zero-mass observations are
// undefined and must never be read; the mask records which ones exist.
class ConditionalDistribution {
  public:
    ConditionalDistribution(int state_count, int obs_count,
                            std::vector<double> rows, std::vector<bool> defined);

    // All rows defined.
    static ConditionalDistribution from_rows(const std::vector<std::vector<double>>& rows);

    int state_count() const { return nx_; }
    int obs_count() const { return ny_; }
    bool defined(int y) const { return defined_[static_cast<std::size_t>(y)]; }

    // q(x|y); throws if row y is undefined.
    double operator()(int x, int y) const;
    FiniteDistribution row(int y) const;

  private:
    int nx_;
    int ny_;
    std::vector<double> rows_; // obs-major, nx entries per observation
    std::vector<bool> defined_;
};

struct Decomposition {
    FiniteDistribution obs_marginal;     // p_Y
    ConditionalDistribution posterior;   // p_{X|Y}
};

// Splits a joint law into the observation marginal and the posterior
// family.  Rows attached to zero-mass observations come back undefined.
Decomposition decompose(const JointDistribution& joint);

// Half L1 distance between two distributions on the same alphabet.
// Equals the largest probability discrepancy over subsets.
double variational_distance(const FiniteDistribution& a, const FiniteDistribution& b);

// Observation-averaged variational distance between two conditional
// families: sum_y p_Y(y) d(a(.|y), b(.|y)).  Zero-mass rows contribute
// nothing and may be undefined.
double joint_variational_distance(const ConditionalDistribution& a,
                                  const ConditionalDistribution& b,
                                  const FiniteDistribution& obs_marginal);

// Draws a symbol index from dist; deterministic given the stream state.
int sample(const FiniteDistribution& dist, RandomStream& rng);

// Shared helper: draws an index from unnormalized nonnegative weights.
// Returns -1 when every weight is zero.
int sample_weights(std::span<const double> weights, RandomStream& rng);

} // namespace stodec
