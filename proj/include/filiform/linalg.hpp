#ifndef FILIFORM_LINALG_HPP
#define FILIFORM_LINALG_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "filiform/rational.hpp"

namespace filiform {

using VecQ = std::vector<Rational>;

// Sparse row: (column, value) pairs, sorted by column, no zero values.
using SparseRow = std::vector<std::pair<std::size_t, Rational>>;

inline SparseRow to_sparse(const VecQ& dense) {
    SparseRow out;
    for (std::size_t c = 0; c < dense.size(); ++c)
        if (!dense[c].is_zero()) out.emplace_back(c, dense[c]);
    return out;
}

inline VecQ to_dense(const SparseRow& row, std::size_t cols) {
    VecQ out(cols, Rational(0));
    for (const auto& [c, v] : row) out[c] = v;
    return out;
}

class MatrixQ {
public:
    MatrixQ() = default;
    MatrixQ(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

    static MatrixQ identity(std::size_t n) {
        MatrixQ m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    static MatrixQ from_rows(const std::vector<VecQ>& rows) {
        if (rows.empty()) return MatrixQ();
        MatrixQ m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) throw std::invalid_argument("from_rows: ragged rows");
            for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    VecQ row(std::size_t r) const {
        return VecQ(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const Rational& v) { return v.is_zero(); });
    }

    bool operator==(const MatrixQ& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    MatrixQ operator*(const MatrixQ& rhs) const {
        if (cols_ != rhs.rows_) throw std::invalid_argument("matrix product: shape mismatch");
        MatrixQ out(rows_, rhs.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const Rational& a = (*this)(i, k);
                if (a.is_zero()) continue;
                for (std::size_t j = 0; j < rhs.cols_; ++j) {
                    const Rational& b = rhs(k, j);
                    if (!b.is_zero()) out(i, j) += a * b;
                }
            }
        return out;
    }

    MatrixQ operator+(const MatrixQ& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw std::invalid_argument("matrix sum: shape mismatch");
        MatrixQ out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + rhs.data_[i];
        return out;
    }

    MatrixQ operator-(const MatrixQ& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw std::invalid_argument("matrix diff: shape mismatch");
        MatrixQ out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - rhs.data_[i];
        return out;
    }

    MatrixQ scaled(const Rational& s) const {
        MatrixQ out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * s;
        return out;
    }

    VecQ apply(const VecQ& x) const {
        if (x.size() != cols_) throw std::invalid_argument("matrix apply: length mismatch");
        VecQ out(rows_, Rational(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (!(*this)(i, j).is_zero() && !x[j].is_zero()) out[i] += (*this)(i, j) * x[j];
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

// Incremental exact Gaussian elimination. Rows are inserted one at a time,
// reduced against the pivots collected so far, and kept when independent.
// The large derivation/pre-derivation systems are extremely sparse, so rows
// stay sparse throughout; the final back-elimination yields the unique RREF
// of the accumulated row space.
class RowReducer {
public:
    explicit RowReducer(std::size_t cols) : cols_(cols), pivot_row_of_col_(cols, -1) {}

    std::size_t cols() const { return cols_; }
    std::size_t rank() const { return rows_.size(); }

    void add_row(SparseRow row) {
        normalize(row);
        while (!row.empty()) {
            const std::size_t lead = row.front().first;
            const std::ptrdiff_t pr = pivot_row_of_col_[lead];
            if (pr < 0) {
                const Rational inv = Rational(1) / row.front().second;
                if (!(inv == 1))
                    for (auto& [c, v] : row) v *= inv;
                pivot_row_of_col_[lead] = static_cast<std::ptrdiff_t>(rows_.size());
                pivot_cols_.push_back(lead);
                rows_.push_back(std::move(row));
                reduced_ = false;
                return;
            }
            axpy(row, -row.front().second, rows_[static_cast<std::size_t>(pr)]);
        }
    }

    void add_dense_row(const VecQ& row) {
        if (row.size() != cols_) throw std::invalid_argument("add_dense_row: length mismatch");
        add_row(to_sparse(row));
    }

    // Pivot columns in increasing order.
    std::vector<std::size_t> pivots() const {
        std::vector<std::size_t> p = pivot_cols_;
        std::sort(p.begin(), p.end());
        return p;
    }

    // Rows of the unique reduced row echelon form, ordered by pivot column.
    std::vector<VecQ> reduced_rows() {
        back_eliminate();
        std::vector<VecQ> out;
        out.reserve(rows_.size());
        for (std::size_t p : pivots())
            out.push_back(to_dense(rows_[static_cast<std::size_t>(pivot_row_of_col_[p])], cols_));
        return out;
    }

    // Canonical basis of {x : Rx = 0} for the accumulated row space R.
    std::vector<VecQ> nullspace_basis() {
        back_eliminate();
        std::vector<std::size_t> piv = pivots();
        std::vector<bool> is_pivot(cols_, false);
        for (std::size_t p : piv) is_pivot[p] = true;
        std::vector<VecQ> out;
        for (std::size_t f = 0; f < cols_; ++f) {
            if (is_pivot[f]) continue;
            VecQ x(cols_, Rational(0));
            x[f] = 1;
            for (std::size_t p : piv) {
                const SparseRow& r = rows_[static_cast<std::size_t>(pivot_row_of_col_[p])];
                auto it = std::lower_bound(r.begin(), r.end(), f,
                                           [](const auto& e, std::size_t c) { return e.first < c; });
                if (it != r.end() && it->first == f) x[p] = -it->second;
            }
            out.push_back(std::move(x));
        }
        return out;
    }

private:
    std::size_t cols_;
    std::vector<SparseRow> rows_;
    std::vector<std::ptrdiff_t> pivot_row_of_col_;
    std::vector<std::size_t> pivot_cols_;
    bool reduced_ = true;

    static void normalize(SparseRow& row) {
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        SparseRow merged;
        for (auto& [c, v] : row) {
            if (!merged.empty() && merged.back().first == c)
                merged.back().second += v;
            else
                merged.emplace_back(c, std::move(v));
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const auto& e) { return e.second.is_zero(); }),
                     merged.end());
        row = std::move(merged);
    }

    // row += coef * other (sorted merge, zeros dropped).
    static void axpy(SparseRow& row, const Rational& coef, const SparseRow& other) {
        SparseRow out;
        out.reserve(row.size() + other.size());
        std::size_t i = 0, j = 0;
        while (i < row.size() || j < other.size()) {
            if (j == other.size() || (i < row.size() && row[i].first < other[j].first)) {
                out.push_back(std::move(row[i++]));
            } else if (i == row.size() || other[j].first < row[i].first) {
                out.emplace_back(other[j].first, coef * other[j].second);
                ++j;
            } else {
                Rational v = row[i].second + coef * other[j].second;
                if (!v.is_zero()) out.emplace_back(row[i].first, std::move(v));
                ++i;
                ++j;
            }
        }
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [](const auto& e) { return e.second.is_zero(); }),
                  out.end());
        row = std::move(out);
    }

    void back_eliminate() {
        if (reduced_) return;
        std::vector<std::size_t> piv = pivots();
        for (auto it = piv.rbegin(); it != piv.rend(); ++it) {
            SparseRow& row = rows_[static_cast<std::size_t>(pivot_row_of_col_[*it])];
            SparseRow targets;
            for (const auto& [c, v] : row)
                if (c != *it && pivot_row_of_col_[c] >= 0) targets.emplace_back(c, v);
            for (const auto& [c, v] : targets)
                axpy(row, -v, rows_[static_cast<std::size_t>(pivot_row_of_col_[c])]);
        }
        reduced_ = true;
    }
};

struct RrefResult {
    MatrixQ matrix;
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
};

inline RrefResult rref(const MatrixQ& m) {
    RowReducer red(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) red.add_dense_row(m.row(r));
    RrefResult out;
    out.pivots = red.pivots();
    out.rank = red.rank();
    out.matrix = MatrixQ(m.rows(), m.cols());
    const std::vector<VecQ> rows = red.reduced_rows();
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out.matrix(r, c) = rows[r][c];
    return out;
}

// A linear subspace of Q^ambient in canonical form: the basis rows are the
// unique RREF of any spanning set, so equality of subspaces is equality of
// representations.
class SubspaceQ {
public:
    SubspaceQ() = default;
    explicit SubspaceQ(std::size_t ambient) : ambient_(ambient) {}

    static SubspaceQ span(std::size_t ambient, const std::vector<VecQ>& vectors) {
        RowReducer red(ambient);
        for (const VecQ& v : vectors) {
            if (v.size() != ambient) throw std::invalid_argument("span: vector length mismatch");
            red.add_dense_row(v);
        }
        SubspaceQ s(ambient);
        s.basis_ = red.reduced_rows();
        return s;
    }

    static SubspaceQ full(std::size_t ambient) {
        SubspaceQ s(ambient);
        for (std::size_t i = 0; i < ambient; ++i) {
            VecQ e(ambient, Rational(0));
            e[i] = 1;
            s.basis_.push_back(std::move(e));
        }
        return s;
    }

    std::size_t ambient_dim() const { return ambient_; }
    std::size_t dim() const { return basis_.size(); }
    const std::vector<VecQ>& basis() const { return basis_; }

    bool contains(const VecQ& v) const {
        if (v.size() != ambient_) throw std::invalid_argument("contains: length mismatch");
        VecQ w = v;
        for (const VecQ& row : basis_) {
            const std::size_t p = pivot_of(row);
            if (w[p].is_zero()) continue;
            const Rational coef = w[p];
            for (std::size_t c = p; c < ambient_; ++c)
                if (!row[c].is_zero()) w[c] -= coef * row[c];
        }
        return std::all_of(w.begin(), w.end(), [](const Rational& x) { return x.is_zero(); });
    }

    bool contains(const SubspaceQ& other) const {
        if (other.ambient_ != ambient_) throw std::invalid_argument("contains: ambient mismatch");
        return std::all_of(other.basis_.begin(), other.basis_.end(),
                           [&](const VecQ& v) { return contains(v); });
    }

    bool operator==(const SubspaceQ& other) const {
        return ambient_ == other.ambient_ && basis_ == other.basis_;
    }

private:
    std::size_t ambient_ = 0;
    std::vector<VecQ> basis_;

    static std::size_t pivot_of(const VecQ& row) {
        for (std::size_t c = 0; c < row.size(); ++c)
            if (!row[c].is_zero()) return c;
        throw std::logic_error("zero basis row");
    }
};

inline bool subspace_equal(const SubspaceQ& a, const SubspaceQ& b) {
    if (a.ambient_dim() != b.ambient_dim())
        throw std::invalid_argument("subspace_equal: ambient dimension mismatch");
    return a == b;
}

inline SubspaceQ nullspace(const MatrixQ& m) {
    RowReducer red(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) red.add_dense_row(m.row(r));
    return SubspaceQ::span(m.cols(), red.nullspace_basis());
}

// {x : b . x = 0 for every basis vector b of s}.
inline SubspaceQ annihilator(const SubspaceQ& s) {
    RowReducer red(s.ambient_dim());
    for (const VecQ& b : s.basis()) red.add_dense_row(b);
    return SubspaceQ::span(s.ambient_dim(), red.nullspace_basis());
}

// {v in restricted_to : M v = 0 for every M in ops}.
inline SubspaceQ common_kernel(const std::vector<MatrixQ>& ops, const SubspaceQ& restricted_to) {
    const std::size_t n = restricted_to.ambient_dim();
    for (const MatrixQ& m : ops)
        if (m.rows() != n || m.cols() != n)
            throw std::invalid_argument("common_kernel: operator dimension mismatch");
    if (restricted_to.dim() == 0 || ops.empty()) return restricted_to;

    const std::size_t d = restricted_to.dim();
    // Columns of q are the basis of restricted_to; solve (M q) c = 0 for all M.
    RowReducer red(d);
    for (const MatrixQ& m : ops) {
        for (std::size_t r = 0; r < n; ++r) {
            VecQ row(d, Rational(0));
            bool nonzero = false;
            for (std::size_t k = 0; k < d; ++k) {
                Rational acc(0);
                for (std::size_t c = 0; c < n; ++c)
                    if (!m(r, c).is_zero()) acc += m(r, c) * restricted_to.basis()[k][c];
                if (!acc.is_zero()) nonzero = true;
                row[k] = std::move(acc);
            }
            if (nonzero) red.add_dense_row(row);
        }
    }
    std::vector<VecQ> vectors;
    for (const VecQ& c : red.nullspace_basis()) {
        VecQ v(n, Rational(0));
        for (std::size_t k = 0; k < d; ++k)
            if (!c[k].is_zero())
                for (std::size_t i = 0; i < n; ++i) v[i] += c[k] * restricted_to.basis()[k][i];
        vectors.push_back(std::move(v));
    }
    return SubspaceQ::span(n, vectors);
}

}  // namespace filiform

#endif  // FILIFORM_LINALG_HPP
