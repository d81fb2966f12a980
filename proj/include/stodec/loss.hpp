#pragma once

#include <vector>

namespace stodec {

// Structural properties a loss matrix may satisfy.  Bounds that rely on
// a property refuse to run when the corresponding flag is unset.
struct LossFlags {
    bool nonneg = false;         // L(x, xhat) >= 0
    bool zero_iff_equal = false; // L(x, xhat) == 0 exactly when x == xhat
    bool symmetric = false;      // L(x, xhat) == L(xhat, x)
    bool subadditive = false;    // L(x, xhat) <= L(x, z) + L(z, xhat)
};

// Loss matrix over the state alphabet with declared structural flags.
// The flags are verified against the matrix at construction; +infinity
// entries are allowed and make the supremum infinite.
class LossFunction {
  public:
    LossFunction(int state_count, std::vector<double> entries, LossFlags declared);

    // Detects every flag that actually holds for the given matrix.
    static LossFunction from_matrix(int state_count, std::vector<double> entries);

    // 0-1 loss: the indicator of a wrong guess.  Metric, supremum 1.
    static LossFunction zero_one(int state_count);

    // |a_x - a_xhat| for real anchors; a metric whenever anchors are
    // distinct (zero_iff_equal is detected, not assumed).
    static LossFunction line_metric(const std::vector<double>& anchors);

    int state_count() const { return n_; }
    double operator()(int x, int xhat) const {
        return m_[static_cast<std::size_t>(x) * n_ + xhat];
    }
    double sup_loss() const { return sup_; } // may be +infinity
    const LossFlags& flags() const { return flags_; }

  private:
    int n_;
    std::vector<double> m_;
    LossFlags flags_;
    double sup_;
};

} // namespace stodec
