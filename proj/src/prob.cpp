#include "stodec/prob.hpp"

#include <cmath>
#include <stdexcept>

namespace stodec {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 applied to the index-th element of the master stream
    std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

void check_probability_vector(const std::vector<double>& p, const char* what) {
    if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty alphabet");
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > kProbTolerance)
        throw std::invalid_argument(std::string(what) + ": entries do not sum to one");
}

} // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs) : p_(std::move(probs)) {
    check_probability_vector(p_, "FiniteDistribution");
}

FiniteDistribution FiniteDistribution::point_mass(int symbol, int size) {
    if (symbol < 0 || symbol >= size)
        throw std::invalid_argument("point_mass: symbol out of range");
    std::vector<double> p(static_cast<std::size_t>(size), 0.0);
    p[static_cast<std::size_t>(symbol)] = 1.0;
    return FiniteDistribution(std::move(p));
}

FiniteDistribution FiniteDistribution::uniform(int size) {
    if (size < 1) throw std::invalid_argument("uniform: size must be positive");
    return FiniteDistribution(std::vector<double>(static_cast<std::size_t>(size),
                                                  1.0 / static_cast<double>(size)));
}

JointDistribution::JointDistribution(int state_count, int obs_count,
                                     std::vector<double> entries)
    : nx_(state_count), ny_(obs_count), m_(std::move(entries)) {
    if (nx_ < 1 || ny_ < 1) throw std::invalid_argument("JointDistribution: empty alphabet");
    if (m_.size() != static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_))
        throw std::invalid_argument("JointDistribution: entry count mismatch");
    double total = 0.0;
    for (double v : m_) {
        if (!(v >= 0.0)) throw std::invalid_argument("JointDistribution: negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > kProbTolerance)
        throw std::invalid_argument("JointDistribution: entries do not sum to one");
}

JointDistribution JointDistribution::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty())
        throw std::invalid_argument("JointDistribution: empty matrix");
    const int nx = static_cast<int>(rows.size());
    const int ny = static_cast<int>(rows.front().size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(nx) * ny);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != ny)
            throw std::invalid_argument("JointDistribution: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return JointDistribution(nx, ny, std::move(flat));
}

ConditionalDistribution::ConditionalDistribution(int state_count, int obs_count,
                                                 std::vector<double> rows,
                                                 std::vector<bool> defined)
    : nx_(state_count), ny_(obs_count), rows_(std::move(rows)), defined_(std::move(defined)) {
    if (nx_ < 1 || ny_ < 1)
        throw std::invalid_argument("ConditionalDistribution: empty alphabet");
    if (rows_.size() != static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) ||
        defined_.size() != static_cast<std::size_t>(ny_))
        throw std::invalid_argument("ConditionalDistribution: shape mismatch");
    for (int y = 0; y < ny_; ++y) {
        if (!defined_[static_cast<std::size_t>(y)]) continue;
        double total = 0.0;
        for (int x = 0; x < nx_; ++x) {
            double v = rows_[static_cast<std::size_t>(y) * nx_ + x];
            if (!(v >= 0.0))
                throw std::invalid_argument("ConditionalDistribution: negative entry");
            total += v;
        }
        if (std::abs(total - 1.0) > kProbTolerance)
            throw std::invalid_argument("ConditionalDistribution: row does not sum to one");
    }
}

ConditionalDistribution ConditionalDistribution::from_rows(
    const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty())
        throw std::invalid_argument("ConditionalDistribution: empty matrix");
    const int ny = static_cast<int>(rows.size());
    const int nx = static_cast<int>(rows.front().size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(nx) * ny);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != nx)
            throw std::invalid_argument("ConditionalDistribution: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return ConditionalDistribution(nx, ny, std::move(flat),
                                   std::vector<bool>(static_cast<std::size_t>(ny), true));
}

double ConditionalDistribution::operator()(int x, int y) const {
    if (!defined_[static_cast<std::size_t>(y)])
        throw std::logic_error("ConditionalDistribution: read of undefined row");
    return rows_[static_cast<std::size_t>(y) * nx_ + x];
}

FiniteDistribution ConditionalDistribution::row(int y) const {
    if (!defined_[static_cast<std::size_t>(y)])
        throw std::logic_error("ConditionalDistribution: read of undefined row");
    auto begin = rows_.begin() + static_cast<std::ptrdiff_t>(y) * nx_;
    return FiniteDistribution(std::vector<double>(begin, begin + nx_));
}

Decomposition decompose(const JointDistribution& joint) {
    const int nx = joint.state_count();
    const int ny = joint.obs_count();
    std::vector<double> marginal(static_cast<std::size_t>(ny), 0.0);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) marginal[static_cast<std::size_t>(y)] += joint(x, y);

    std::vector<double> rows(static_cast<std::size_t>(nx) * ny, 0.0);
    std::vector<bool> defined(static_cast<std::size_t>(ny), false);
    for (int y = 0; y < ny; ++y) {
        const double py = marginal[static_cast<std::size_t>(y)];
        if (py <= 0.0) continue;
        defined[static_cast<std::size_t>(y)] = true;
        for (int x = 0; x < nx; ++x)
            rows[static_cast<std::size_t>(y) * nx + x] = joint(x, y) / py;
    }
    return Decomposition{FiniteDistribution(std::move(marginal)),
                         ConditionalDistribution(nx, ny, std::move(rows), std::move(defined))};
}

double variational_distance(const FiniteDistribution& a, const FiniteDistribution& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("variational_distance: alphabet mismatch");
    double total = 0.0;
    for (int i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return 0.5 * total;
}

double joint_variational_distance(const ConditionalDistribution& a,
                                  const ConditionalDistribution& b,
                                  const FiniteDistribution& obs_marginal) {
    if (a.state_count() != b.state_count() || a.obs_count() != b.obs_count() ||
        a.obs_count() != obs_marginal.size())
        throw std::invalid_argument("joint_variational_distance: alphabet mismatch");
    double total = 0.0;
    for (int y = 0; y < a.obs_count(); ++y) {
        const double py = obs_marginal[y];
        if (py <= 0.0) continue;
        double row = 0.0;
        for (int x = 0; x < a.state_count(); ++x) row += std::abs(a(x, y) - b(x, y));
        total += py * 0.5 * row;
    }
    return total;
}

int sample(const FiniteDistribution& dist, RandomStream& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    const int n = dist.size();
    for (int i = 0; i < n; ++i) {
        acc += dist[i];
        if (u < acc) return i;
    }
    // Guard against accumulated rounding: return the last positive symbol.
    for (int i = n - 1; i >= 0; --i)
        if (dist[i] > 0.0) return i;
    return n - 1;
}

int sample_weights(std::span<const double> weights, RandomStream& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return -1;
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    const int n = static_cast<int>(weights.size());
    for (int i = 0; i < n; ++i) {
        acc += weights[static_cast<std::size_t>(i)];
        if (u < acc) return i;
    }
    for (int i = n - 1; i >= 0; --i)
        if (weights[static_cast<std::size_t>(i)] > 0.0) return i;
    return -1;
}

} // namespace stodec
