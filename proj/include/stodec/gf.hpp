#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stodec {

// Arithmetic modulo a prime.  Symbols are ints in {0, ..., q-1}.
class PrimeField {
  public:
    explicit PrimeField(int order);

    int order() const { return q_; }
    int add(int a, int b) const { return (a + b) % q_; }
    int sub(int a, int b) const { return (a - b + q_) % q_; }
    int mul(int a, int b) const { return (a * b) % q_; }
    int neg(int a) const { return (q_ - a) % q_; }
    int inv(int a) const; // throws on zero

  private:
    int q_;
    std::vector<int> inv_;
};

struct CheckEntry {
    int column;
    int coeff; // in {1, ..., q-1}
};

// Sparse l x n check matrix over a prime field.  Rows list their
// nonzero entries; no duplicate columns within a row.
class SparseCheckMatrix {
  public:
    SparseCheckMatrix(int columns, int field_order,
                      std::vector<std::vector<CheckEntry>> rows);

    // Dense rows, zeros dropped.
    static SparseCheckMatrix from_dense(const std::vector<std::vector<int>>& rows,
                                        int field_order);

    int columns() const { return n_; }
    int row_count() const { return static_cast<int>(rows_.size()); }
    const PrimeField& field() const { return field_; }
    const std::vector<CheckEntry>& row(int i) const {
        return rows_[static_cast<std::size_t>(i)];
    }

    // c = A x.
    std::vector<int> syndrome(std::span<const int> x) const;

  private:
    int n_;
    PrimeField field_;
    std::vector<std::vector<CheckEntry>> rows_;
};

// All solutions of A x = c in lexicographic order (leftmost coordinate
// most significant).  Throws when q^n exceeds max_terms.
std::vector<std::vector<int>> coset_enumerate(const SparseCheckMatrix& A,
                                              std::span<const int> target,
                                              std::uint64_t max_terms = 10'000'000);

// Row-reduced form of a check matrix: the surviving rows read
// [reduced | identity] in permuted coordinates.  Positions
// 0 .. free_count-1 are free, the remaining rank() positions are parity.
// The recorded row transform maps an original target vector onto the
// reduced one and exposes the dropped-row consistency conditions.
class SystematicForm {
  public:
    int columns() const { return n_; }
    int rank() const { return rank_; }
    int free_count() const { return n_ - rank_; }
    int original_row_count() const { return l_; }
    const PrimeField& field() const { return field_; }

    // Entry of the reduced block: row in [0, rank), free position in
    // [0, free_count).
    int reduced_entry(int row, int free_pos) const {
        return reduced_[static_cast<std::size_t>(row) * (n_ - rank_) + free_pos];
    }

    // permutation()[k] = original column stored at reduced position k.
    const std::vector<int>& permutation() const { return perm_; }

    std::vector<int> to_original(std::span<const int> reduced) const;
    std::vector<int> to_reduced(std::span<const int> original) const;

    // Applies the recorded row operations to an original target vector.
    // Returns the rank()-long reduced target, or nullopt when a dropped
    // row demands a nonzero value (the coset is empty).
    std::optional<std::vector<int>> transform_target(std::span<const int> target) const;

    // Coset member with all free positions zero, in original
    // coordinates; nullopt when the system is infeasible.
    std::optional<std::vector<int>> feasible_point(std::span<const int> target) const;

    // Completes a free-coordinate assignment to the unique coset member
    // with the given reduced target (length rank()).  Original coords.
    std::vector<int> complete(std::span<const int> free_values,
                              std::span<const int> reduced_target) const;

  private:
    friend SystematicForm to_systematic(const SparseCheckMatrix& A);
    int n_ = 0;
    int l_ = 0;
    int rank_ = 0;
    PrimeField field_{2};
    std::vector<int> reduced_;          // rank x free_count, row-major
    std::vector<int> perm_;             // reduced position -> original column
    std::vector<int> row_transform_;    // l x l, row-major; first rank rows kept
};

// Gauss-Jordan elimination with column pivoting; redundant rows are
// dropped.  The solution sets of the original and reduced systems
// correspond bijectively through the recorded permutation.
SystematicForm to_systematic(const SparseCheckMatrix& A);

// Plain-text exchange format: a header "n l q" followed by one line per
// row holding the entry count and its (column, coefficient) pairs.
SparseCheckMatrix read_check_matrix(std::istream& in);
SparseCheckMatrix load_check_matrix(const std::string& path);
void write_check_matrix(std::ostream& out, const SparseCheckMatrix& A);
void save_check_matrix(const std::string& path, const SparseCheckMatrix& A);

} // namespace stodec
