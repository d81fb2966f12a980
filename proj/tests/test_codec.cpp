#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "stodec/codec.hpp"
#include "stodec/oracle.hpp"

using namespace stodec;

namespace {

DecoderOptions options_for(DecoderBackend backend) {
    DecoderOptions opts;
    opts.backend = backend;
    opts.gibbs_iterations = 150;
    return opts;
}

const DecoderBackend kAllBackends[] = {DecoderBackend::enumeration,
                                       DecoderBackend::sum_product, DecoderBackend::gibbs,
                                       DecoderBackend::gibbs_max};

} // namespace

TEST_CASE("compress is the syndrome map") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0}, {1, 0, 1}}, 2);
    CHECK(compress(A, std::vector<int>{1, 0, 1}) == std::vector<int>{1, 0});
    CHECK(compress(A, std::vector<int>{0, 0, 0}) == std::vector<int>{0, 0});
    CHECK(image_log_size(A) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("every backend decodes a singleton coset deterministically") {
    const auto A = SparseCheckMatrix::from_dense({{1, 0}, {1, 1}}, 2);
    const std::vector<int> codeword = {1, 0};
    for (const auto backend : kAllBackends) {
        RandomStream rng(7);
        const auto x = decompress_stochastic(codeword, A, FiniteDistribution({0.6, 0.4}),
                                             options_for(backend), rng);
        REQUIRE(x.has_value());
        CHECK(*x == std::vector<int>{1, 1});
    }
}

TEST_CASE("uniform priors make the decoder output uniform on the coset") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0}, {0, 1, 1}}, 2);
    const std::vector<int> codeword = {1, 0};
    const auto members = coset_enumerate(A, codeword);
    REQUIRE(members.size() == 2);
    for (const auto backend : {DecoderBackend::enumeration, DecoderBackend::sum_product,
                               DecoderBackend::gibbs}) {
        RandomStream rng(123);
        std::map<std::vector<int>, int> counts;
        for (int i = 0; i < 4000; ++i) {
            const auto x = decompress_stochastic(codeword, A, FiniteDistribution::uniform(2),
                                                 options_for(backend), rng);
            REQUIRE(x.has_value());
            ++counts[*x];
        }
        for (const auto& m : members) {
            const double frac = counts[m] / 4000.0;
            CHECK(std::abs(frac - 0.5) < 0.05);
        }
    }
}

TEST_CASE("empty and zero-mass cosets surface as decode failures") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1}, {1, 1}}, 2);
    RandomStream rng(3);
    for (const auto backend : kAllBackends) {
        const auto x = decompress_stochastic(std::vector<int>{0, 1}, A,
                                             FiniteDistribution({0.5, 0.5}),
                                             options_for(backend), rng);
        CHECK(!x.has_value());
    }
    // Linearly feasible but weightless.
    const auto B = SparseCheckMatrix::from_dense({{1, 0}}, 2);
    for (const auto backend : {DecoderBackend::enumeration, DecoderBackend::sum_product}) {
        const auto x = decompress_stochastic(std::vector<int>{1}, B,
                                             FiniteDistribution({1.0, 0.0}),
                                             options_for(backend), rng);
        CHECK(!x.has_value());
    }
}

TEST_CASE("noiseless side information reproduces the source exactly") {
    const int n = 6;
    const auto A = SparseCheckMatrix::from_dense(
        {{1, 1, 0, 0, 0, 0}, {0, 0, 1, 1, 0, 0}, {0, 0, 0, 0, 1, 1}}, 2);
    const SourceModel model = SourceModel::binary_symmetric(0.0, n);
    RandomStream rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> x, y;
        model.draw_pair(rng, x, y);
        const auto codeword = compress(A, x);
        const auto estimate =
            sw_decode(codeword, y, A, model, options_for(DecoderBackend::sum_product), rng);
        REQUIRE(estimate.has_value());
        CHECK(*estimate == x);
    }
}

TEST_CASE("decoded blocks always lie in the commanded coset") {
    const auto A = SparseCheckMatrix::from_dense(
        {{1, 1, 1, 0, 0, 0}, {0, 1, 0, 1, 1, 0}, {1, 0, 0, 0, 1, 1}}, 2);
    const SourceModel model = SourceModel::binary_symmetric(0.1, 6);
    for (const auto backend : kAllBackends) {
        RandomStream rng(29);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<int> x, y;
            model.draw_pair(rng, x, y);
            const auto codeword = compress(A, x);
            const auto estimate = sw_decode(codeword, y, A, model, options_for(backend), rng);
            REQUIRE(estimate.has_value());
            CHECK(compress(A, *estimate) == codeword);
        }
    }
}

TEST_CASE("stacked encoder honors both constraint sets") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0, 0}, {0, 1, 1, 0}}, 2);
    const auto B = SparseCheckMatrix::from_dense({{0, 0, 1, 1}}, 2);
    const CodeSpec spec{A, B, {1, 0}, SourceModel::binary_symmetric(0.05, 4)};
    for (const auto backend : kAllBackends) {
        RandomStream rng(31);
        for (int m = 0; m < 2; ++m) {
            const std::vector<int> message = {m};
            const auto x = channel_encode(message, spec, options_for(backend), rng);
            REQUIRE(x.has_value());
            CHECK(spec.check_matrix.syndrome(*x) == spec.fixed_syndrome);
            CHECK(spec.message_map->syndrome(*x) == message);
        }
    }
}

TEST_CASE("incompatible constraints give the encoding-error branch") {
    // A pins both coordinates to the fixed syndrome, so the message row
    // is already determined; asking for the other value must fail.
    const auto A = SparseCheckMatrix::from_dense({{1, 0}, {0, 1}}, 2);
    const auto B = SparseCheckMatrix::from_dense({{1, 1}}, 2);
    const CodeSpec spec{A, B, {0, 0},
                        SourceModel::iid_prior(FiniteDistribution::uniform(2), 2)};
    RandomStream rng(37);
    const std::vector<int> bad = {1};
    const std::vector<int> good = {0};
    for (const auto backend : kAllBackends) {
        CHECK(!channel_encode(bad, spec, options_for(backend), rng).has_value());
        const auto x = channel_encode(good, spec, options_for(backend), rng);
        REQUIRE(x.has_value());
        CHECK(*x == std::vector<int>{0, 0});
    }
}

TEST_CASE("encoding errors match the oracle across all targets") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0, 0}, {0, 0, 1, 1}}, 2);
    const auto B = SparseCheckMatrix::from_dense({{1, 1, 1, 1}}, 2);
    const SourceModel model = SourceModel::iid_prior(FiniteDistribution::uniform(2), 4);
    const auto stacked = stack_matrices(A, B);
    RandomStream rng(41);
    for (const auto backend : {DecoderBackend::enumeration, DecoderBackend::sum_product}) {
        for (int c0 = 0; c0 < 2; ++c0)
            for (int c1 = 0; c1 < 2; ++c1)
                for (int m = 0; m < 2; ++m) {
                    const CodeSpec spec{A, B, {c0, c1}, model};
                    const std::vector<int> message = {m};
                    const auto x = channel_encode(message, spec, options_for(backend), rng);
                    const std::vector<int> target = {c0, c1, m};
                    const auto oracle = exact_constrained_posterior(stacked, target,
                                                                    model.state_marginals());
                    CHECK(x.has_value() == oracle.has_value());
                }
    }
}

TEST_CASE("channel decode recovers the message over a noiseless channel") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0, 0}, {0, 1, 1, 0}}, 2);
    const auto B = SparseCheckMatrix::from_dense({{0, 0, 1, 1}}, 2);
    // Identity channel: the output pins the input.
    std::vector<FiniteDistribution> channel_rows = {FiniteDistribution({1.0, 0.0}),
                                                    FiniteDistribution({0.0, 1.0})};
    const CodeSpec spec{A, B, {1, 0},
                        SourceModel::from_prior_and_channel(FiniteDistribution::uniform(2),
                                                            channel_rows, 4)};
    RandomStream rng(59);
    const auto opts = options_for(DecoderBackend::enumeration);
    for (int m = 0; m < 2; ++m) {
        const std::vector<int> message = {m};
        const auto x = channel_encode(message, spec, opts, rng);
        REQUIRE(x.has_value());
        const auto decoded = channel_decode(*x, spec, opts, rng); // received = sent
        REQUIRE(decoded.has_value());
        CHECK(*decoded == message);
    }
}

TEST_CASE("message errors only happen when the block is wrong") {
    const auto stacked_src = SparseCheckMatrix::from_dense(
        {{1, 1, 0, 0, 1, 0}, {0, 1, 1, 0, 0, 0}, {0, 0, 0, 1, 1, 0}, {1, 0, 0, 0, 0, 1}}, 2);
    std::vector<std::vector<CheckEntry>> a_rows = {stacked_src.row(0), stacked_src.row(1)};
    std::vector<std::vector<CheckEntry>> b_rows = {stacked_src.row(2), stacked_src.row(3)};
    const CodeSpec spec{SparseCheckMatrix(6, 2, a_rows), SparseCheckMatrix(6, 2, b_rows),
                        {0, 1}, SourceModel::binary_symmetric(0.1, 6)};
    RandomStream rng(43);
    const auto opts = options_for(DecoderBackend::enumeration);
    int message_errors = 0, block_errors = 0;
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<int> message = {rng.uniform_int(2), rng.uniform_int(2)};
        const auto x = channel_encode(message, spec, opts, rng);
        REQUIRE(x.has_value());
        std::vector<int> received(x->size());
        for (std::size_t j = 0; j < x->size(); ++j) {
            const bool flip = rng.uniform01() < 0.1;
            received[j] = flip ? 1 - (*x)[j] : (*x)[j];
        }
        const auto estimate =
            sw_decode(spec.fixed_syndrome, received, spec.check_matrix, spec.model, opts, rng);
        REQUIRE(estimate.has_value());
        const bool block_wrong = *estimate != *x;
        const bool msg_wrong = spec.message_map->syndrome(*estimate) != message;
        if (msg_wrong) CHECK(block_wrong);
        message_errors += msg_wrong;
        block_errors += block_wrong;
    }
    CHECK(message_errors <= block_errors);
}

TEST_CASE("additive-noise roundtrip ties decode errors to noise errors") {
    const auto A = SparseCheckMatrix::from_dense(
        {{1, 1, 0, 1, 0, 0}, {0, 1, 1, 0, 1, 0}, {1, 0, 1, 0, 0, 1}}, 2);
    const FiniteDistribution noise({0.9, 0.1});
    const auto codewords = coset_members(to_systematic(A), std::vector<int>{0, 0, 0});
    RandomStream rng(47);
    for (const auto backend : kAllBackends) {
        for (int trial = 0; trial < 60; ++trial) {
            const auto& z = codewords[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(codewords.size())))];
            const auto trip = additive_noise_roundtrip(z, noise, A, options_for(backend), rng);
            REQUIRE(trip.has_value());
            CHECK(A.syndrome(trip->noise_estimate) == A.syndrome(trip->noise));
            CHECK(trip->success == (trip->noise_estimate == trip->noise));
            CHECK(trip->success == (trip->codeword_estimate == z));
        }
    }
    // Non-codeword inputs are rejected up front.
    std::vector<int> not_codeword(6, 0);
    not_codeword[0] = 1;
    if (A.syndrome(not_codeword) != std::vector<int>{0, 0, 0}) {
        RandomStream r2(5);
        CHECK_THROWS_AS(
            additive_noise_roundtrip(not_codeword, noise, A,
                                     options_for(DecoderBackend::enumeration), r2),
            std::invalid_argument);
    }
}

TEST_CASE("source codec error stays within the oracle band") {
    // Plain compression (no side information): the stochastic decoder's
    // block error lies between the optimal error and twice it.
    const int n = 10, l = 5;
    std::vector<std::vector<CheckEntry>> rows(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i)
        rows[static_cast<std::size_t>(i)] = {CheckEntry{2 * i, 1}, CheckEntry{2 * i + 1, 1},
                                             CheckEntry{(2 * i + 3) % n, 1}};
    const SparseCheckMatrix A(n, 2, rows);
    const FiniteDistribution prior({0.9, 0.1});
    const SourceModel model = SourceModel::iid_prior(prior, n);
    const double e_map = exact_sw_map_error(A, model);
    REQUIRE(e_map > 0.0);

    DecoderOptions opts = options_for(DecoderBackend::enumeration);
    RandomStream rng(61);
    int errors = 0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        std::vector<int> x(n);
        for (auto& v : x) v = sample(prior, rng);
        const auto estimate = decompress_stochastic(compress(A, x), A, prior, opts, rng);
        REQUIRE(estimate.has_value());
        errors += (*estimate != x);
    }
    const double measured = static_cast<double>(errors) / trials;
    const double halfwidth = 1.96 * std::sqrt(measured * (1.0 - measured) / trials);
    CHECK(measured >= e_map - halfwidth);
    CHECK(measured <= 2.0 * e_map + halfwidth);
}

TEST_CASE("repeated draws implement the best-of-pool decision") {
    // Pooling many draws concentrates the output on the posterior mode.
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0}, {0, 1, 1}}, 2);
    const std::vector<int> codeword = {1, 0};
    const FiniteDistribution prior({0.7, 0.3});
    const auto posterior = exact_constrained_posterior(
        A, codeword, std::vector<FiniteDistribution>(3, prior));
    REQUIRE(posterior.has_value());
    std::vector<int> mode;
    double best = -1.0;
    for (const auto& [x, p] : *posterior)
        if (p > best) {
            best = p;
            mode = x;
        }
    DecoderOptions opts = options_for(DecoderBackend::enumeration);
    opts.sequence_repeats = 12;
    RandomStream rng(53);
    int hits = 0;
    const int trials = 500;
    for (int i = 0; i < trials; ++i) {
        const auto x = decompress_stochastic(codeword, A, prior, opts, rng);
        REQUIRE(x.has_value());
        hits += (*x == mode);
    }
    // P(miss) = (1 - p_mode)^12 per trial; with p_mode around 0.7 the
    // pooled decision should almost never miss.
    CHECK(hits > trials * 95 / 100);
}

TEST_CASE("code spec descriptors load from JSON") {
    const std::string dir = "codec_spec_test_tmp";
    std::filesystem::create_directories(dir);
    {
        std::ofstream m(dir + "/check.txt");
        m << "4 2 2\n2 0 1 1 1\n2 2 1 3 1\n";
        std::ofstream b(dir + "/message.txt");
        b << "4 1 2\n2 1 1 2 1\n";
        std::ofstream j(dir + "/spec.json");
        j << R"({"check_matrix": "check.txt", "message_matrix": "message.txt",
                 "fixed_syndrome": [1, 0],
                 "model": {"kind": "bsc", "flip_prob": 0.05}})";
        std::ofstream o(dir + "/opts.json");
        o << R"({"backend": "gibbs-max", "gibbs_iterations": 77, "sequence_repeats": 3})";
    }
    const CodeSpec spec = load_code_spec(dir + "/spec.json");
    CHECK(spec.block_length() == 4);
    CHECK(spec.check_matrix.row_count() == 2);
    CHECK(spec.message_map.has_value());
    CHECK(spec.fixed_syndrome == std::vector<int>{1, 0});
    CHECK(spec.syndrome_rate() == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(spec.message_rate() == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-12));
    const DecoderOptions opts = load_decoder_options(dir + "/opts.json");
    CHECK(opts.backend == DecoderBackend::gibbs_max);
    CHECK(opts.gibbs_iterations == 77);
    CHECK(opts.sequence_repeats == 3);
    std::filesystem::remove_all(dir);
}
