#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <set>
#include <sstream>

#include "stodec/gf.hpp"
#include "stodec/rng.hpp"

using namespace stodec;

namespace {

SparseCheckMatrix pair_matrix() {
    // rows: x0 + x1, x0 + x2 over GF(2)
    return SparseCheckMatrix::from_dense({{1, 1, 0}, {1, 0, 1}}, 2);
}

SparseCheckMatrix random_matrix(RandomStream& rng, int n, int l, int q) {
    std::vector<std::vector<CheckEntry>> rows(static_cast<std::size_t>(l));
    for (auto& row : rows) {
        for (int j = 0; j < n; ++j)
            if (rng.uniform01() < 0.4) row.push_back(CheckEntry{j, 1 + rng.uniform_int(q - 1)});
        if (row.empty()) row.push_back(CheckEntry{rng.uniform_int(n), 1 + rng.uniform_int(q - 1)});
    }
    return SparseCheckMatrix(n, q, std::move(rows));
}

} // namespace

TEST_CASE("prime field arithmetic") {
    const PrimeField f5(5);
    CHECK(f5.add(3, 4) == 2);
    CHECK(f5.sub(1, 3) == 3);
    CHECK(f5.mul(3, 4) == 2);
    for (int a = 1; a < 5; ++a) CHECK(f5.mul(a, f5.inv(a)) == 1);
    CHECK_THROWS_AS(f5.inv(0), std::domain_error);
    CHECK_THROWS_AS(PrimeField(6), std::invalid_argument);
    CHECK_THROWS_AS(PrimeField(1), std::invalid_argument);
}

TEST_CASE("syndrome on the stated cases") {
    const auto A = pair_matrix();
    CHECK(A.syndrome(std::vector<int>{1, 0, 1}) == std::vector<int>{1, 0});
    CHECK(A.syndrome(std::vector<int>{0, 0, 0}) == std::vector<int>{0, 0});
    const SparseCheckMatrix B(2, 3, {{CheckEntry{0, 2}, CheckEntry{1, 1}}});
    CHECK(B.syndrome(std::vector<int>{1, 2}) == std::vector<int>{1});
    CHECK_THROWS_AS(A.syndrome(std::vector<int>{0, 0}), std::invalid_argument);
}

TEST_CASE("coset enumeration on the stated cases") {
    const SparseCheckMatrix A(2, 2, {{CheckEntry{0, 1}, CheckEntry{1, 1}}});
    const auto coset = coset_enumerate(A, std::vector<int>{0});
    REQUIRE(coset.size() == 2);
    CHECK(coset[0] == std::vector<int>{0, 0});
    CHECK(coset[1] == std::vector<int>{1, 1});

    const SparseCheckMatrix inconsistent =
        SparseCheckMatrix::from_dense({{1, 1}, {1, 1}}, 2);
    CHECK(coset_enumerate(inconsistent, std::vector<int>{0, 1}).empty());

    const SparseCheckMatrix square = SparseCheckMatrix::from_dense({{1, 0}, {1, 1}}, 2);
    CHECK(coset_enumerate(square, std::vector<int>{1, 0}).size() == 1);
}

TEST_CASE("coset enumeration respects the term budget") {
    const auto A = pair_matrix();
    CHECK_THROWS_AS(coset_enumerate(A, std::vector<int>{0, 0}, 4), std::length_error);
}

TEST_CASE("an already systematic matrix keeps its shape") {
    const auto sys = to_systematic(pair_matrix());
    CHECK(sys.rank() == 2);
    CHECK(sys.free_count() == 1);
    CHECK(sys.permutation() == std::vector<int>{0, 1, 2});
    CHECK(sys.reduced_entry(0, 0) == 1);
    CHECK(sys.reduced_entry(1, 0) == 1);
}

TEST_CASE("duplicated rows are eliminated") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1, 0}, {1, 1, 0}}, 2);
    const auto sys = to_systematic(A);
    CHECK(sys.rank() == 1);
    // The duplicate row is a consistency condition on the target.
    CHECK(sys.feasible_point(std::vector<int>{1, 1}).has_value());
    CHECK(!sys.feasible_point(std::vector<int>{1, 0}).has_value());
}

TEST_CASE("feasible point on the stated cases") {
    const auto sys = to_systematic(pair_matrix());
    CHECK(sys.feasible_point(std::vector<int>{0, 0}) == std::vector<int>{0, 0, 0});
    CHECK(sys.feasible_point(std::vector<int>{1, 0}) == std::vector<int>{0, 1, 0});
}

TEST_CASE("reduction preserves solution sets on random instances") {
    RandomStream rng(71);
    for (int it = 0; it < 25; ++it) {
        const int n = 4 + rng.uniform_int(7); // up to 10 columns
        const int l = 1 + rng.uniform_int(4);
        const int q = it % 3 == 0 ? 3 : 2;
        const auto A = random_matrix(rng, n, l, q);
        const auto sys = to_systematic(A);

        // A target reachable by construction.
        std::vector<int> x0(static_cast<std::size_t>(n));
        for (auto& v : x0) v = rng.uniform_int(q);
        const auto target = A.syndrome(x0);

        const auto direct = coset_enumerate(A, target, 1u << 22);
        REQUIRE(!direct.empty());

        // Enumerate the reduced system and map back through the
        // permutation: the solution sets must match exactly.
        const auto reduced_target = sys.transform_target(target);
        REQUIRE(reduced_target.has_value());
        std::vector<std::vector<int>> via_reduced;
        if (sys.rank() == 0) {
            via_reduced = direct; // no constraints survive reduction
        } else {
            std::vector<std::vector<int>> rows(static_cast<std::size_t>(sys.rank()));
            for (int r = 0; r < sys.rank(); ++r) {
                rows[static_cast<std::size_t>(r)].assign(static_cast<std::size_t>(n), 0);
                for (int k = 0; k < sys.free_count(); ++k)
                    rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
                        sys.reduced_entry(r, k);
                rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(sys.free_count() + r)] = 1;
            }
            const auto reduced_matrix = SparseCheckMatrix::from_dense(rows, q);
            for (const auto& u : coset_enumerate(reduced_matrix, *reduced_target, 1u << 22))
                via_reduced.push_back(sys.to_original(u));
        }
        std::sort(via_reduced.begin(), via_reduced.end());
        CHECK(direct == via_reduced);

        // Every enumerated member and the feasible point satisfy A x = target.
        for (const auto& x : direct) CHECK(A.syndrome(x) == target);
        const auto fp = sys.feasible_point(target);
        REQUIRE(fp.has_value());
        CHECK(A.syndrome(*fp) == target);

        // Nonempty coset size is a power of the field order.
        std::uint64_t expected = 1;
        for (int k = 0; k < n - sys.rank(); ++k) expected *= static_cast<std::uint64_t>(q);
        CHECK(direct.size() == expected);
    }
}

TEST_CASE("infeasible systems are detected") {
    const auto A = SparseCheckMatrix::from_dense({{1, 1}, {1, 1}}, 2);
    const auto sys = to_systematic(A);
    CHECK(!sys.feasible_point(std::vector<int>{0, 1}).has_value());
    CHECK(sys.feasible_point(std::vector<int>{1, 1}).has_value());
}

TEST_CASE("matrix file format round-trips") {
    RandomStream rng(73);
    const auto A = random_matrix(rng, 9, 4, 3);
    std::stringstream buffer;
    write_check_matrix(buffer, A);
    const auto B = read_check_matrix(buffer);
    CHECK(B.columns() == A.columns());
    CHECK(B.row_count() == A.row_count());
    CHECK(B.field().order() == A.field().order());
    std::vector<int> x(9);
    for (auto& v : x) v = rng.uniform_int(3);
    CHECK(A.syndrome(x) == B.syndrome(x));

    std::stringstream bad("3 1 2\n2 0 1 5 1\n");
    CHECK_THROWS(read_check_matrix(bad));
}

TEST_CASE("matrix validation rejects malformed rows") {
    CHECK_THROWS_AS(SparseCheckMatrix(3, 2, {{CheckEntry{0, 1}, CheckEntry{0, 1}}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SparseCheckMatrix(3, 2, {{CheckEntry{5, 1}}}), std::invalid_argument);
    CHECK_THROWS_AS(SparseCheckMatrix(3, 2, {{CheckEntry{0, 2}}}), std::invalid_argument);
}
