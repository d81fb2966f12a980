#include "stodec/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stodec {

namespace {

LossFlags detect_flags(int n, const std::vector<double>& m) {
    auto at = [&](int x, int xh) { return m[static_cast<std::size_t>(x) * n + xh]; };
    LossFlags f;
    f.nonneg = true;
    f.zero_iff_equal = true;
    f.symmetric = true;
    f.subadditive = true;
    for (int x = 0; x < n; ++x) {
        for (int xh = 0; xh < n; ++xh) {
            const double v = at(x, xh);
            if (std::isnan(v)) throw std::invalid_argument("LossFunction: NaN entry");
            if (!(v >= 0.0)) f.nonneg = false;
            if (x == xh ? v != 0.0 : v == 0.0) f.zero_iff_equal = false;
            if (v != at(xh, x)) f.symmetric = false;
        }
    }
    for (int x = 0; x < n && f.subadditive; ++x)
        for (int xh = 0; xh < n && f.subadditive; ++xh)
            for (int z = 0; z < n; ++z)
                if (at(x, xh) > at(x, z) + at(z, xh)) {
                    f.subadditive = false;
                    break;
                }
    return f;
}

} // namespace

LossFunction::LossFunction(int state_count, std::vector<double> entries, LossFlags declared)
    : n_(state_count), m_(std::move(entries)), flags_(declared) {
    if (n_ < 1) throw std::invalid_argument("LossFunction: empty alphabet");
    if (m_.size() != static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_))
        throw std::invalid_argument("LossFunction: entry count mismatch");
    const LossFlags actual = detect_flags(n_, m_);
    if ((declared.nonneg && !actual.nonneg) ||
        (declared.zero_iff_equal && !actual.zero_iff_equal) ||
        (declared.symmetric && !actual.symmetric) ||
        (declared.subadditive && !actual.subadditive))
        throw std::invalid_argument("LossFunction: declared flag not satisfied by matrix");
    sup_ = -std::numeric_limits<double>::infinity();
    for (double v : m_)
        if (v > sup_) sup_ = v;
}

LossFunction LossFunction::from_matrix(int state_count, std::vector<double> entries) {
    LossFlags flags = detect_flags(state_count, entries);
    return LossFunction(state_count, std::move(entries), flags);
}

LossFunction LossFunction::zero_one(int state_count) {
    std::vector<double> m(static_cast<std::size_t>(state_count) * state_count, 1.0);
    for (int x = 0; x < state_count; ++x) m[static_cast<std::size_t>(x) * state_count + x] = 0.0;
    return LossFunction(state_count, std::move(m),
                        LossFlags{true, true, true, true});
}

LossFunction LossFunction::line_metric(const std::vector<double>& anchors) {
    const int n = static_cast<int>(anchors.size());
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int x = 0; x < n; ++x)
        for (int xh = 0; xh < n; ++xh)
            m[static_cast<std::size_t>(x) * n + xh] = std::abs(anchors[x] - anchors[xh]);
    return from_matrix(n, std::move(m));
}

} // namespace stodec
