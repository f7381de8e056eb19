#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lhd/error.hpp"
#include "lhd/rng.hpp"

namespace lhd {

using level_t = std::int32_t;

/// Dense row-major matrix. Row = run, column = factor throughout the library.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    cells_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) fail(ErrorCode::invalid_dimension, "ragged matrix literal");
      cells_.insert(cells_.end(), row.begin(), row.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return cells_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return cells_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) noexcept { return {cells_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {cells_.data() + r * cols_, cols_}; }

  std::vector<T> column(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::span<const T> data() const noexcept { return cells_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> cells_;
};

using IntMatrix = Matrix<level_t>;
using RealMatrix = Matrix<double>;

/// Anything with runs(), factors() and integer cell access (r, c), 0-based.
template <class D>
concept DesignLike = requires(const D& d, std::size_t r, std::size_t c) {
  { d.runs() } -> std::convertible_to<std::size_t>;
  { d.factors() } -> std::convertible_to<std::size_t>;
  { d(r, c) } -> std::convertible_to<long long>;
};

/// Adapts an IntMatrix that may not be a Latin hypercube.
struct RawDesign {
  const IntMatrix& cells;
  std::size_t runs() const noexcept { return cells.rows(); }
  std::size_t factors() const noexcept { return cells.cols(); }
  level_t operator()(std::size_t r, std::size_t c) const noexcept { return cells(r, c); }
};

struct ColumnCheck {
  bool ok = true;
  std::string message;  // empty when ok
};

struct ValidationReport {
  std::vector<ColumnCheck> columns;
  std::string shape_message;  // set when dimensions alone are invalid

  bool ok() const noexcept {
    return shape_message.empty() &&
           std::all_of(columns.begin(), columns.end(), [](const ColumnCheck& c) { return c.ok; });
  }

  std::string summary() const {
    if (!shape_message.empty()) return shape_message;
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].ok) continue;
      if (!out.empty()) out += "; ";
      out += "column " + std::to_string(c + 1) + ": " + columns[c].message;
    }
    return out;
  }
};

/// Checks that every column is a permutation of 1..n. Never throws.
inline ValidationReport validate(const IntMatrix& cells) {
  ValidationReport report;
  const std::size_t n = cells.rows();
  if (n < 2 || cells.cols() < 1) {
    report.shape_message = "need n >= 2 and k >= 1, got " + std::to_string(n) + "x" +
                           std::to_string(cells.cols());
    return report;
  }
  report.columns.resize(cells.cols());
  std::vector<std::size_t> seen(n + 1);
  for (std::size_t c = 0; c < cells.cols(); ++c) {
    std::fill(seen.begin(), seen.end(), 0);
    auto& check = report.columns[c];
    for (std::size_t r = 0; r < n; ++r) {
      const level_t v = cells(r, c);
      if (v < 1 || static_cast<std::size_t>(v) > n) {
        check.ok = false;
        check.message = "level " + std::to_string(v) + " at row " + std::to_string(r + 1) +
                        " not in 1.." + std::to_string(n);
        break;
      }
      if (seen[static_cast<std::size_t>(v)]++ > 0) {
        check.ok = false;
        check.message = "level " + std::to_string(v) + " repeated";
        break;
      }
    }
  }
  return report;
}

/// An n x k Latin hypercube: every column is a permutation of 1..n.
///
/// Instances are always valid; the only ways in are the checked factory and
/// the library's own permutation-preserving operations.
class DesignMatrix {
 public:
  static DesignMatrix from_cells(IntMatrix cells) {
    const auto report = validate(cells);
    if (!report.ok()) fail(ErrorCode::invalid_design, "not a Latin hypercube: " + report.summary());
    return DesignMatrix(std::move(cells));
  }

  static DesignMatrix from_rows(std::initializer_list<std::initializer_list<level_t>> rows) {
    return from_cells(IntMatrix(rows));
  }

  std::size_t runs() const noexcept { return cells_.rows(); }
  std::size_t factors() const noexcept { return cells_.cols(); }
  level_t operator()(std::size_t r, std::size_t c) const noexcept { return cells_(r, c); }
  std::span<const level_t> row(std::size_t r) const noexcept { return cells_.row(r); }
  std::vector<level_t> column(std::size_t c) const { return cells_.column(c); }
  const IntMatrix& cells() const noexcept { return cells_; }

  // Unchecked in-place swap of two cells in one column; keeps the invariant.
  void swap_in_column(std::size_t column, std::size_t i, std::size_t j) noexcept {
    std::swap(cells_(i, column), cells_(j, column));
  }

  // Replace column c with another permutation of 1..n (caller guarantees it).
  void assign_column(std::size_t column, std::span<const level_t> values) noexcept {
    for (std::size_t r = 0; r < runs(); ++r) cells_(r, column) = values[r];
  }

  friend bool operator==(const DesignMatrix&, const DesignMatrix&) = default;

 private:
  explicit DesignMatrix(IntMatrix cells) : cells_(std::move(cells)) {}
  IntMatrix cells_;
};

inline void check_dimensions(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1) {
    fail(ErrorCode::invalid_dimension,
         "need n >= 2 and k >= 1, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
}

/// Random LHD; each column an independent Fisher-Yates shuffle of 1..n.
inline DesignMatrix random_lhd(std::size_t n, std::size_t k, RngStream& rng) {
  check_dimensions(n, k);
  IntMatrix cells(n, k);
  std::vector<level_t> perm(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::iota(perm.begin(), perm.end(), level_t{1});
    rng.shuffle(std::span<level_t>(perm));
    for (std::size_t r = 0; r < n; ++r) cells(r, c) = perm[r];
  }
  return DesignMatrix::from_cells(std::move(cells));
}

inline DesignMatrix random_lhd(std::size_t n, std::size_t k, std::uint64_t seed,
                               std::uint64_t stream_id = 0) {
  RngStream rng(seed, stream_id);
  return random_lhd(n, k, rng);
}

/// Copy of `design` with rows i and j of `column` swapped (0-based indices).
inline DesignMatrix exchange(const DesignMatrix& design, std::size_t column, std::size_t i,
                             std::size_t j) {
  if (column >= design.factors() || i >= design.runs() || j >= design.runs()) {
    fail(ErrorCode::index_out_of_range, "exchange index out of range");
  }
  DesignMatrix out = design;
  out.swap_in_column(column, i, j);
  return out;
}

inline void check_distance_exponent(int q) {
  if (q != 1 && q != 2) {
    fail(ErrorCode::unsupported_exponent, "distance exponent q must be 1 or 2, got " + std::to_string(q));
  }
}

/// Integer form of a pair distance: L1 sum for q = 1, squared L2 for q = 2.
template <DesignLike D>
std::int64_t raw_pair_distance(const D& design, std::size_t a, std::size_t b, int q) {
  std::int64_t sum = 0;
  for (std::size_t c = 0; c < design.factors(); ++c) {
    const std::int64_t diff = static_cast<std::int64_t>(design(a, c)) - design(b, c);
    sum += q == 1 ? (diff < 0 ? -diff : diff) : diff * diff;
  }
  return sum;
}

inline double raw_to_distance(std::int64_t raw, int q) {
  return q == 1 ? static_cast<double>(raw) : std::sqrt(static_cast<double>(raw));
}

template <DesignLike D>
RealMatrix distance_matrix(const D& design, int q = 1) {
  check_distance_exponent(q);
  const std::size_t n = design.runs();
  RealMatrix out(n, n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      out(a, b) = out(b, a) = raw_to_distance(raw_pair_distance(design, a, b, q), q);
    }
  }
  return out;
}

/// Rows partitioned into t slices of m runs; slice index stored 0-based.
struct SliceStructure {
  std::size_t t = 0;
  std::size_t m = 0;
  std::vector<std::size_t> assignment;

  std::size_t runs() const noexcept { return assignment.size(); }
  std::vector<std::size_t> rows_of(std::size_t slice) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignment.size(); ++r) {
      if (assignment[r] == slice) rows.push_back(r);
    }
    return rows;
  }

  friend bool operator==(const SliceStructure&, const SliceStructure&) = default;
};

inline SliceStructure make_slices(std::size_t n, std::size_t t) {
  if (t < 2) fail(ErrorCode::invalid_parameter, "slice count t must be >= 2");
  if (n % t != 0) {
    fail(ErrorCode::indivisible_runs,
         "n=" + std::to_string(n) + " is not divisible by t=" + std::to_string(t));
  }
  const std::size_t m = n / t;
  if (m < 2) fail(ErrorCode::invalid_parameter, "need at least 2 runs per slice");
  SliceStructure s{t, m, std::vector<std::size_t>(n)};
  for (std::size_t r = 0; r < n; ++r) s.assignment[r] = r / m;
  return s;
}

inline void check_slices(const SliceStructure& slices) {
  if (slices.t < 2 || slices.m < 2) fail(ErrorCode::invalid_parameter, "need t >= 2 and m >= 2");
  if (slices.assignment.size() != slices.t * slices.m) {
    fail(ErrorCode::indivisible_runs, "slice assignment length must equal m*t");
  }
  std::vector<std::size_t> count(slices.t, 0);
  for (auto s : slices.assignment) {
    if (s >= slices.t) fail(ErrorCode::invalid_parameter, "slice index out of range");
    ++count[s];
  }
  for (auto c : count) {
    if (c != slices.m) fail(ErrorCode::invalid_parameter, "every slice must hold exactly m runs");
  }
}

/// Level bin of x under t slices: ceil(x / t), 1-based.
inline level_t slice_bin(level_t x, std::size_t t) {
  return static_cast<level_t>((static_cast<std::size_t>(x) + t - 1) / t);
}

/// True when every slice, in every column, hits bins 1..m exactly once.
inline bool is_slice_valid(const DesignMatrix& design, const SliceStructure& slices) {
  if (design.runs() != slices.runs()) return false;
  for (std::size_t c = 0; c < design.factors(); ++c) {
    for (std::size_t s = 0; s < slices.t; ++s) {
      std::vector<bool> hit(slices.m + 1, false);
      for (std::size_t r = 0; r < design.runs(); ++r) {
        if (slices.assignment[r] != s) continue;
        const auto bin = static_cast<std::size_t>(slice_bin(design(r, c), slices.t));
        if (bin < 1 || bin > slices.m || hit[bin]) return false;
        hit[bin] = true;
      }
    }
  }
  return true;
}

}  // namespace lhd
