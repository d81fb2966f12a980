#include "stodec/gf.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stodec {

namespace {

bool is_prime(int q) {
    if (q < 2) return false;
    for (int d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

} // namespace

PrimeField::PrimeField(int order) : q_(order) {
    if (!is_prime(q_)) throw std::invalid_argument("PrimeField: order must be prime");
    inv_.assign(static_cast<std::size_t>(q_), 0);
    for (int a = 1; a < q_; ++a)
        for (int b = 1; b < q_; ++b)
            if (a * b % q_ == 1) {
                inv_[static_cast<std::size_t>(a)] = b;
                break;
            }
}

int PrimeField::inv(int a) const {
    if (a % q_ == 0) throw std::domain_error("PrimeField: zero has no inverse");
    return inv_[static_cast<std::size_t>(a % q_)];
}

SparseCheckMatrix::SparseCheckMatrix(int columns, int field_order,
                                     std::vector<std::vector<CheckEntry>> rows)
    : n_(columns), field_(field_order), rows_(std::move(rows)) {
    if (n_ < 1) throw std::invalid_argument("SparseCheckMatrix: no columns");
    if (rows_.empty()) throw std::invalid_argument("SparseCheckMatrix: no rows");
    for (auto& row : rows_) {
        std::vector<bool> seen(static_cast<std::size_t>(n_), false);
        for (const auto& e : row) {
            if (e.column < 0 || e.column >= n_)
                throw std::invalid_argument("SparseCheckMatrix: column out of range");
            if (e.coeff < 1 || e.coeff >= field_.order())
                throw std::invalid_argument("SparseCheckMatrix: coefficient out of range");
            if (seen[static_cast<std::size_t>(e.column)])
                throw std::invalid_argument("SparseCheckMatrix: duplicate column in row");
            seen[static_cast<std::size_t>(e.column)] = true;
        }
        std::sort(row.begin(), row.end(),
                  [](const CheckEntry& a, const CheckEntry& b) { return a.column < b.column; });
    }
}

SparseCheckMatrix SparseCheckMatrix::from_dense(const std::vector<std::vector<int>>& rows,
                                                int field_order) {
    if (rows.empty()) throw std::invalid_argument("SparseCheckMatrix: no rows");
    const int n = static_cast<int>(rows.front().size());
    std::vector<std::vector<CheckEntry>> sparse(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw std::invalid_argument("SparseCheckMatrix: ragged rows");
        for (int j = 0; j < n; ++j) {
            const int v = rows[i][static_cast<std::size_t>(j)];
            if (v != 0) sparse[i].push_back(CheckEntry{j, v});
        }
    }
    return SparseCheckMatrix(n, field_order, std::move(sparse));
}

std::vector<int> SparseCheckMatrix::syndrome(std::span<const int> x) const {
    if (static_cast<int>(x.size()) != n_)
        throw std::invalid_argument("syndrome: dimension mismatch");
    std::vector<int> c(rows_.size(), 0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        int acc = 0;
        for (const auto& e : rows_[i])
            acc = field_.add(acc, field_.mul(e.coeff, x[static_cast<std::size_t>(e.column)]));
        c[i] = acc;
    }
    return c;
}

std::vector<std::vector<int>> coset_enumerate(const SparseCheckMatrix& A,
                                              std::span<const int> target,
                                              std::uint64_t max_terms) {
    if (static_cast<int>(target.size()) != A.row_count())
        throw std::invalid_argument("coset_enumerate: target length mismatch");
    const int n = A.columns();
    const int q = A.field().order();
    std::uint64_t total = 1;
    for (int j = 0; j < n; ++j) {
        total *= static_cast<std::uint64_t>(q);
        if (total > max_terms)
            throw std::length_error("coset_enumerate: q^n exceeds the term budget");
    }
    std::vector<std::vector<int>> members;
    std::vector<int> x(static_cast<std::size_t>(n), 0);
    for (std::uint64_t it = 0;; ++it) {
        const auto c = A.syndrome(x);
        if (std::equal(c.begin(), c.end(), target.begin(), target.end()))
            members.push_back(x);
        // odometer with the last coordinate fastest => lexicographic order
        int pos = n - 1;
        while (pos >= 0 && x[static_cast<std::size_t>(pos)] == q - 1) {
            x[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++x[static_cast<std::size_t>(pos)];
    }
    return members;
}

SystematicForm to_systematic(const SparseCheckMatrix& A) {
    const int n = A.columns();
    const int l = A.row_count();
    const PrimeField& F = A.field();

    // Dense working copies: M is l x n, T is the l x l row transform.
    std::vector<int> M(static_cast<std::size_t>(l) * n, 0);
    std::vector<int> T(static_cast<std::size_t>(l) * l, 0);
    for (int i = 0; i < l; ++i) {
        for (const auto& e : A.row(i)) M[static_cast<std::size_t>(i) * n + e.column] = e.coeff;
        T[static_cast<std::size_t>(i) * l + i] = 1;
    }
    auto m_at = [&](int r, int c) -> int& { return M[static_cast<std::size_t>(r) * n + c]; };

    // Gauss-Jordan with pivots searched right-to-left, so an input that
    // already ends in an identity block keeps its column order.
    std::vector<int> pivot_row_of_col(static_cast<std::size_t>(n), -1);
    std::vector<bool> row_used(static_cast<std::size_t>(l), false);
    for (int col = n - 1; col >= 0; --col) {
        int pivot = -1;
        for (int r = 0; r < l; ++r)
            if (!row_used[static_cast<std::size_t>(r)] && m_at(r, col) != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        row_used[static_cast<std::size_t>(pivot)] = true;
        pivot_row_of_col[static_cast<std::size_t>(col)] = pivot;
        const int scale = F.inv(m_at(pivot, col));
        if (scale != 1) {
            for (int c = 0; c < n; ++c) m_at(pivot, c) = F.mul(m_at(pivot, c), scale);
            for (int c = 0; c < l; ++c)
                T[static_cast<std::size_t>(pivot) * l + c] =
                    F.mul(T[static_cast<std::size_t>(pivot) * l + c], scale);
        }
        for (int r = 0; r < l; ++r) {
            if (r == pivot) continue;
            const int factor = m_at(r, col);
            if (factor == 0) continue;
            for (int c = 0; c < n; ++c)
                m_at(r, c) = F.sub(m_at(r, c), F.mul(factor, m_at(pivot, c)));
            for (int c = 0; c < l; ++c)
                T[static_cast<std::size_t>(r) * l + c] =
                    F.sub(T[static_cast<std::size_t>(r) * l + c],
                          F.mul(factor, T[static_cast<std::size_t>(pivot) * l + c]));
        }
    }

    // Free columns first (ascending), then pivot columns (ascending);
    // kept rows follow their pivot column so the identity lines up.
    std::vector<int> free_cols, pivot_cols;
    for (int col = 0; col < n; ++col)
        (pivot_row_of_col[static_cast<std::size_t>(col)] < 0 ? free_cols : pivot_cols)
            .push_back(col);
    const int rank = static_cast<int>(pivot_cols.size());
    const int free_count = n - rank;

    SystematicForm sys;
    sys.n_ = n;
    sys.l_ = l;
    sys.rank_ = rank;
    sys.field_ = F;
    sys.perm_.reserve(static_cast<std::size_t>(n));
    sys.perm_ = free_cols;
    sys.perm_.insert(sys.perm_.end(), pivot_cols.begin(), pivot_cols.end());

    sys.reduced_.assign(static_cast<std::size_t>(rank) * free_count, 0);
    sys.row_transform_.assign(static_cast<std::size_t>(l) * l, 0);
    for (int r = 0; r < rank; ++r) {
        const int src = pivot_row_of_col[static_cast<std::size_t>(pivot_cols[static_cast<std::size_t>(r)])];
        for (int k = 0; k < free_count; ++k)
            sys.reduced_[static_cast<std::size_t>(r) * free_count + k] =
                m_at(src, free_cols[static_cast<std::size_t>(k)]);
        for (int c = 0; c < l; ++c)
            sys.row_transform_[static_cast<std::size_t>(r) * l + c] =
                T[static_cast<std::size_t>(src) * l + c];
    }
    int out = rank;
    for (int r = 0; r < l; ++r) {
        if (row_used[static_cast<std::size_t>(r)]) continue;
        for (int c = 0; c < l; ++c)
            sys.row_transform_[static_cast<std::size_t>(out) * l + c] =
                T[static_cast<std::size_t>(r) * l + c];
        ++out;
    }
    return sys;
}

std::vector<int> SystematicForm::to_original(std::span<const int> reduced) const {
    if (static_cast<int>(reduced.size()) != n_)
        throw std::invalid_argument("to_original: length mismatch");
    std::vector<int> x(static_cast<std::size_t>(n_), 0);
    for (int k = 0; k < n_; ++k)
        x[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])] =
            reduced[static_cast<std::size_t>(k)];
    return x;
}

std::vector<int> SystematicForm::to_reduced(std::span<const int> original) const {
    if (static_cast<int>(original.size()) != n_)
        throw std::invalid_argument("to_reduced: length mismatch");
    std::vector<int> u(static_cast<std::size_t>(n_), 0);
    for (int k = 0; k < n_; ++k)
        u[static_cast<std::size_t>(k)] =
            original[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])];
    return u;
}

std::optional<std::vector<int>> SystematicForm::transform_target(
    std::span<const int> target) const {
    if (static_cast<int>(target.size()) != l_)
        throw std::invalid_argument("transform_target: target length mismatch");
    std::vector<int> full(static_cast<std::size_t>(l_), 0);
    for (int r = 0; r < l_; ++r) {
        int acc = 0;
        for (int c = 0; c < l_; ++c)
            acc = field_.add(acc, field_.mul(row_transform_[static_cast<std::size_t>(r) * l_ + c],
                                             target[static_cast<std::size_t>(c)]));
        full[static_cast<std::size_t>(r)] = acc;
    }
    for (int r = rank_; r < l_; ++r)
        if (full[static_cast<std::size_t>(r)] != 0) return std::nullopt;
    full.resize(static_cast<std::size_t>(rank_));
    return full;
}

std::vector<int> SystematicForm::complete(std::span<const int> free_values,
                                          std::span<const int> reduced_target) const {
    if (static_cast<int>(free_values.size()) != free_count() ||
        static_cast<int>(reduced_target.size()) != rank_)
        throw std::invalid_argument("complete: length mismatch");
    std::vector<int> u(static_cast<std::size_t>(n_), 0);
    for (int k = 0; k < free_count(); ++k) u[static_cast<std::size_t>(k)] = free_values[static_cast<std::size_t>(k)];
    for (int r = 0; r < rank_; ++r) {
        int acc = reduced_target[static_cast<std::size_t>(r)];
        for (int k = 0; k < free_count(); ++k)
            acc = field_.sub(acc, field_.mul(reduced_entry(r, k), u[static_cast<std::size_t>(k)]));
        u[static_cast<std::size_t>(free_count() + r)] = acc;
    }
    return to_original(u);
}

std::optional<std::vector<int>> SystematicForm::feasible_point(
    std::span<const int> target) const {
    const auto reduced_target = transform_target(target);
    if (!reduced_target) return std::nullopt;
    const std::vector<int> zeros(static_cast<std::size_t>(free_count()), 0);
    return complete(zeros, *reduced_target);
}

SparseCheckMatrix read_check_matrix(std::istream& in) {
    int n = 0, l = 0, q = 0;
    if (!(in >> n >> l >> q))
        throw std::runtime_error("check matrix: malformed header");
    std::vector<std::vector<CheckEntry>> rows(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
        int weight = 0;
        if (!(in >> weight) || weight < 0)
            throw std::runtime_error("check matrix: malformed row weight");
        rows[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(weight));
        for (int k = 0; k < weight; ++k) {
            int col = 0, coeff = 0;
            if (!(in >> col >> coeff))
                throw std::runtime_error("check matrix: malformed row entry");
            rows[static_cast<std::size_t>(i)].push_back(CheckEntry{col, coeff});
        }
    }
    return SparseCheckMatrix(n, q, std::move(rows));
}

SparseCheckMatrix load_check_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("check matrix: cannot open " + path);
    return read_check_matrix(in);
}

void write_check_matrix(std::ostream& out, const SparseCheckMatrix& A) {
    out << A.columns() << ' ' << A.row_count() << ' ' << A.field().order() << '\n';
    for (int i = 0; i < A.row_count(); ++i) {
        out << A.row(i).size();
        for (const auto& e : A.row(i)) out << ' ' << e.column << ' ' << e.coeff;
        out << '\n';
    }
}

void save_check_matrix(const std::string& path, const SparseCheckMatrix& A) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("check matrix: cannot open " + path);
    write_check_matrix(out, A);
}

} // namespace stodec
