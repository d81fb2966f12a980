#include "stodec/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stodec {

SourceModel::SourceModel(std::vector<JointDistribution> position_laws)
    : laws_(std::move(position_laws)) {
    if (laws_.empty()) throw std::invalid_argument("SourceModel: no positions");
    for (const auto& law : laws_)
        if (law.state_count() != laws_.front().state_count() ||
            law.obs_count() != laws_.front().obs_count())
            throw std::invalid_argument("SourceModel: inconsistent alphabets");
}

SourceModel SourceModel::iid(const JointDistribution& per_position, int length) {
    if (length < 1) throw std::invalid_argument("SourceModel: length must be positive");
    return SourceModel(std::vector<JointDistribution>(static_cast<std::size_t>(length),
                                                      per_position));
}

SourceModel SourceModel::iid_prior(const FiniteDistribution& prior, int length) {
    std::vector<double> entries(prior.probs());
    return iid(JointDistribution(prior.size(), 1, std::move(entries)), length);
}

SourceModel SourceModel::from_prior_and_channel(
    const FiniteDistribution& prior, const std::vector<FiniteDistribution>& channel_rows,
    int length) {
    const int nx = prior.size();
    if (static_cast<int>(channel_rows.size()) != nx)
        throw std::invalid_argument("SourceModel: channel row count mismatch");
    const int ny = channel_rows.front().size();
    std::vector<double> entries(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int x = 0; x < nx; ++x) {
        if (channel_rows[static_cast<std::size_t>(x)].size() != ny)
            throw std::invalid_argument("SourceModel: ragged channel rows");
        for (int y = 0; y < ny; ++y)
            entries[static_cast<std::size_t>(x) * ny + y] =
                prior[x] * channel_rows[static_cast<std::size_t>(x)][y];
    }
    return iid(JointDistribution(nx, ny, std::move(entries)), length);
}

SourceModel SourceModel::binary_symmetric(double flip_prob, int length) {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
        throw std::invalid_argument("SourceModel: flip probability out of range");
    const double keep = 0.5 * (1.0 - flip_prob);
    const double flip = 0.5 * flip_prob;
    return iid(JointDistribution(2, 2, {keep, flip, flip, keep}), length);
}

std::vector<FiniteDistribution> SourceModel::posteriors_given(std::span<const int> obs) const {
    if (static_cast<int>(obs.size()) != length())
        throw std::invalid_argument("SourceModel: observation length mismatch");
    std::vector<FiniteDistribution> out;
    out.reserve(laws_.size());
    for (int j = 0; j < length(); ++j) {
        const auto& law = laws_[static_cast<std::size_t>(j)];
        const int y = obs[static_cast<std::size_t>(j)];
        if (y < 0 || y >= law.obs_count())
            throw std::invalid_argument("SourceModel: observation symbol out of range");
        double mass = 0.0;
        for (int x = 0; x < law.state_count(); ++x) mass += law(x, y);
        if (!(mass > 0.0))
            throw std::invalid_argument("SourceModel: zero-mass observation symbol");
        std::vector<double> row(static_cast<std::size_t>(law.state_count()), 0.0);
        for (int x = 0; x < law.state_count(); ++x) row[static_cast<std::size_t>(x)] = law(x, y) / mass;
        out.emplace_back(std::move(row));
    }
    return out;
}

std::vector<FiniteDistribution> SourceModel::state_marginals() const {
    std::vector<FiniteDistribution> out;
    out.reserve(laws_.size());
    for (const auto& law : laws_) {
        std::vector<double> p(static_cast<std::size_t>(law.state_count()), 0.0);
        for (int x = 0; x < law.state_count(); ++x)
            for (int y = 0; y < law.obs_count(); ++y) p[static_cast<std::size_t>(x)] += law(x, y);
        out.emplace_back(std::move(p));
    }
    return out;
}

double SourceModel::log_conditional_mass(std::span<const int> x, std::span<const int> obs) const {
    const auto posteriors = posteriors_given(obs);
    if (x.size() != posteriors.size())
        throw std::invalid_argument("SourceModel: state length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < posteriors.size(); ++j) {
        const double p = posteriors[j][x[j]];
        if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
        acc += std::log(p);
    }
    return acc;
}

void SourceModel::draw_pair(RandomStream& rng, std::vector<int>& x, std::vector<int>& obs) const {
    x.resize(laws_.size());
    obs.resize(laws_.size());
    for (std::size_t j = 0; j < laws_.size(); ++j) {
        const auto& law = laws_[j];
        std::vector<double> flat(static_cast<std::size_t>(law.state_count()) * law.obs_count());
        for (int xx = 0; xx < law.state_count(); ++xx)
            for (int yy = 0; yy < law.obs_count(); ++yy)
                flat[static_cast<std::size_t>(xx) * law.obs_count() + yy] = law(xx, yy);
        const int idx = sample_weights(flat, rng);
        x[j] = idx / law.obs_count();
        obs[j] = idx % law.obs_count();
    }
}

} // namespace stodec
