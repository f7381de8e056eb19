#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lhd/csv.hpp"
#include "lhd/design.hpp"
#include "lhd/error.hpp"
#include "lhd/rng.hpp"

namespace lhd {

/// Symmetric orthogonal array OA(N, K, s, t) over symbols 1..s.
class OrthogonalArray {
 public:
  /// Validates symbol range, per-column balance and strength-t balance.
  static OrthogonalArray from_cells(IntMatrix cells, int levels, int strength = 2) {
    check(cells, levels, strength);
    return OrthogonalArray(std::move(cells), levels, strength);
  }

  std::size_t runs() const noexcept { return cells_.rows(); }
  std::size_t columns() const noexcept { return cells_.cols(); }
  int levels() const noexcept { return levels_; }
  int strength() const noexcept { return strength_; }
  level_t operator()(std::size_t r, std::size_t c) const noexcept { return cells_(r, c); }
  const IntMatrix& cells() const noexcept { return cells_; }

  friend bool operator==(const OrthogonalArray&, const OrthogonalArray&) = default;

 private:
  OrthogonalArray(IntMatrix cells, int levels, int strength)
      : cells_(std::move(cells)), levels_(levels), strength_(strength) {}

  static void check(const IntMatrix& cells, int s, int t) {
    const std::size_t n = cells.rows();
    const std::size_t k = cells.cols();
    if (s < 2) fail(ErrorCode::invalid_oa, "an orthogonal array needs s >= 2 levels");
    if (t < 2) fail(ErrorCode::invalid_oa, "strength must be at least 2");
    if (k < static_cast<std::size_t>(t)) fail(ErrorCode::invalid_oa, "need at least t columns");
    std::size_t cells_per_tuple = n;
    for (int i = 0; i < t; ++i) {
      if (cells_per_tuple % static_cast<std::size_t>(s) != 0) {
        fail(ErrorCode::invalid_oa, "N=" + std::to_string(n) + " is not a multiple of s^t");
      }
      cells_per_tuple /= static_cast<std::size_t>(s);
    }
    if (cells_per_tuple == 0) fail(ErrorCode::invalid_oa, "empty array");
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        if (cells(r, c) < 1 || cells(r, c) > s) {
          fail(ErrorCode::invalid_oa, "symbol " + std::to_string(cells(r, c)) + " outside 1.." + std::to_string(s));
        }
      }
    }
    // Balance in single columns first so the common defect gets a clear message.
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::size_t> count(static_cast<std::size_t>(s), 0);
      for (std::size_t r = 0; r < n; ++r) ++count[static_cast<std::size_t>(cells(r, c) - 1)];
      for (auto cnt : count) {
        if (cnt != n / static_cast<std::size_t>(s)) {
          fail(ErrorCode::invalid_oa, "column " + std::to_string(c + 1) + " has unbalanced symbol counts");
        }
      }
    }
    // Every t-subset of columns: each t-tuple exactly N / s^t times.
    std::vector<std::size_t> subset(static_cast<std::size_t>(t));
    std::iota(subset.begin(), subset.end(), std::size_t{0});
    for (;;) {
      std::map<std::vector<level_t>, std::size_t> count;
      std::vector<level_t> tuple(subset.size());
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < subset.size(); ++i) tuple[i] = cells(r, subset[i]);
        ++count[tuple];
      }
      std::size_t expected_tuples = 1;
      for (int i = 0; i < t; ++i) expected_tuples *= static_cast<std::size_t>(s);
      if (count.size() != expected_tuples) {
        fail(ErrorCode::invalid_oa, "not strength " + std::to_string(t) + ": missing symbol tuples");
      }
      for (const auto& [_, cnt] : count) {
        if (cnt != cells_per_tuple) {
          fail(ErrorCode::invalid_oa, "not strength " + std::to_string(t) + ": unbalanced symbol tuples");
        }
      }
      // Next combination in lexicographic order.
      std::size_t i = subset.size();
      while (i > 0 && subset[i - 1] == k - subset.size() + i - 1) --i;
      if (i == 0) break;
      ++subset[i - 1];
      for (std::size_t j = i; j < subset.size(); ++j) subset[j] = subset[j - 1] + 1;
    }
  }

  IntMatrix cells_;
  int levels_;
  int strength_;
};

enum class FillMode { deterministic, random };

/// Expands an OA into an LHD: in each column the N/s positions holding symbol
/// m receive the levels (m-1)N/s + 1 .. mN/s, ascending in row order
/// (deterministic) or in a random order drawn from rng.
inline DesignMatrix oa_to_lhd(const OrthogonalArray& oa, FillMode mode = FillMode::deterministic,
                              RngStream* rng = nullptr) {
  if (mode == FillMode::random && rng == nullptr) fail(ErrorCode::invalid_parameter, "random fill needs an rng");
  const std::size_t n = oa.runs();
  const auto s = static_cast<std::size_t>(oa.levels());
  const std::size_t block = n / s;
  IntMatrix cells(n, oa.columns());
  std::vector<level_t> fill(block);
  for (std::size_t c = 0; c < oa.columns(); ++c) {
    for (std::size_t m = 1; m <= s; ++m) {
      std::iota(fill.begin(), fill.end(), static_cast<level_t>((m - 1) * block + 1));
      if (mode == FillMode::random) rng->shuffle(std::span<level_t>(fill));
      std::size_t next = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (static_cast<std::size_t>(oa(r, c)) == m) cells(r, c) = fill[next++];
      }
    }
  }
  return DesignMatrix::from_cells(std::move(cells));
}

inline DesignMatrix oa_to_lhd(const OrthogonalArray& oa, RngStream& rng) {
  return oa_to_lhd(oa, FillMode::random, &rng);
}

/// ceil(x * s / N) applied cellwise; inverts oa_to_lhd.
inline IntMatrix collapse_to_oa(const DesignMatrix& design, int levels) {
  const std::size_t n = design.runs();
  IntMatrix out(n, design.factors());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < design.factors(); ++c) {
      const auto scaled = static_cast<std::size_t>(design(r, c)) * static_cast<std::size_t>(levels);
      out(r, c) = static_cast<level_t>((scaled + n - 1) / n);
    }
  }
  return out;
}

/// w(a) = 2a if 2a < n, else 2(n - a) - 1, elementwise on residues 0..n-1.
inline std::vector<level_t> williams_transform(std::span<const level_t> x, level_t n) {
  if (n < 1) fail(ErrorCode::invalid_parameter, "modulus must be positive");
  std::vector<level_t> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const level_t a = x[i];
    if (a < 0 || a >= n) {
      fail(ErrorCode::out_of_range_entry, "entry " + std::to_string(a) + " outside 0.." + std::to_string(n - 1));
    }
    out[i] = 2 * a < n ? 2 * a : 2 * (n - a) - 1;
  }
  return out;
}

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

namespace detail {

// Centered integer columns -> levels 1..n via x - min + 1 (levels are
// consecutive for every construction below, or every other integer when
// `step` is 2).
inline DesignMatrix from_centered(const std::vector<std::vector<std::int64_t>>& columns, std::int64_t step = 1) {
  const std::size_t n = columns.front().size();
  IntMatrix cells(n, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::int64_t lo = columns[c].front();
    for (auto v : columns[c]) lo = std::min(lo, v);
    for (std::size_t r = 0; r < n; ++r) cells(r, c) = static_cast<level_t>((columns[c][r] - lo) / step + 1);
  }
  return DesignMatrix::from_cells(std::move(cells));
}

// Column of the 2^(m-1)-run half design used by Ye-type constructions.
//
// Rows are indexed by b in [0, q). The permutation matrix
// A_k = I x ... x I x R x ... x R (k trailing R = [[0,1],[1,0]]) maps row b
// to b ^ (low k bits), so a product of A's is an XOR mask. The sign vector
// a_k = B_1 x ... x B_{m-1} with B_{m-k} = (-1, 1) is -1 where bit k-1 of b
// is clear. A column is (sign character, permutation mask) applied to
// e = (1, ..., q).
struct HalfColumn {
  std::uint32_t sign_bits;  // set of sign vectors a_k multiplied together
  std::uint32_t mask;       // XOR mask of the permutation product
};

inline std::uint32_t low_bits(int k) { return k <= 0 ? 0u : ((1u << k) - 1u); }
inline std::uint32_t sign_of(int k) { return 1u << (k - 1); }

inline DesignMatrix fold_half_columns(int m, const std::vector<HalfColumn>& spec) {
  const std::size_t q = std::size_t{1} << (m - 1);
  std::vector<std::vector<std::int64_t>> columns;
  for (const auto& col : spec) {
    std::vector<std::int64_t> x(2 * q + 1);
    for (std::size_t b = 0; b < q; ++b) {
      const auto bits = static_cast<std::uint32_t>(b);
      const int negatives = std::popcount(~bits & col.sign_bits);
      const std::int64_t sign = negatives % 2 == 0 ? 1 : -1;
      const std::int64_t value = sign * static_cast<std::int64_t>((bits ^ col.mask) + 1);
      x[b] = value;
      x[q + 1 + b] = -value;
    }
    x[q] = 0;
    columns.push_back(std::move(x));
  }
  return from_centered(columns);
}

inline void check_ye_order(int m) {
  if (m < 2) fail(ErrorCode::invalid_parameter, "m must be >= 2");
  if (m > 20) fail(ErrorCode::invalid_parameter, "m must be <= 20");
}

}  // namespace detail

/// (2^m + 1) x (2m - 2) orthogonal LHD, rows ordered T, center, -T.
inline DesignMatrix olhd_ye1998(int m) {
  using namespace detail;
  check_ye_order(m);
  std::vector<HalfColumn> spec{{0u, 0u}};
  for (int k = 1; k <= m - 1; ++k) spec.push_back({sign_of(k), low_bits(k)});
  for (int k = 1; k <= m - 2; ++k) {
    spec.push_back({sign_of(1) | sign_of(k + 1), low_bits(m - 1) ^ low_bits(k)});
  }
  return fold_half_columns(m, spec);
}

/// (2^m + 1) x (m + C(m-1, 2)) orthogonal LHD. Extends Ye's columns with one
/// column per interaction a_i a_j (1 <= i < j <= m-1), paired with the
/// permutation A_{i-1} A_{j-1} A_{m-1}.
inline DesignMatrix olhd_cioppa2007(int m) {
  using namespace detail;
  check_ye_order(m);
  std::vector<HalfColumn> spec{{0u, 0u}};
  for (int k = 1; k <= m - 1; ++k) spec.push_back({sign_of(k), low_bits(k)});
  for (int i = 1; i <= m - 1; ++i) {
    for (int j = i + 1; j <= m - 1; ++j) {
      spec.push_back({sign_of(i) | sign_of(j), low_bits(i - 1) ^ low_bits(j - 1) ^ low_bits(m - 1)});
    }
  }
  return fold_half_columns(m, spec);
}

namespace detail {

using IntBlock = std::vector<std::vector<std::int64_t>>;

// Negate the top half of the rows.
inline IntBlock star(IntBlock m) {
  for (std::size_t r = 0; r < m.size() / 2; ++r) {
    for (auto& v : m[r]) v = -v;
  }
  return m;
}

// Sun-Liu-Lin recursion: S_1 = [[1,1],[1,-1]], T_1 = [[1,2],[2,-1]],
//   S_{c+1} = [[S, -S*], [S, S*]],
//   T_{c+1} = [[T, -(T* + 2^c S*)], [T + 2^c S, T*]].
inline std::pair<IntBlock, IntBlock> sun_blocks(int c) {
  IntBlock s{{1, 1}, {1, -1}};
  IntBlock t{{1, 2}, {2, -1}};
  for (int level = 1; level < c; ++level) {
    const std::size_t h = s.size();
    const std::int64_t shift = std::int64_t{1} << level;
    const auto ss = star(s);
    const auto ts = star(t);
    IntBlock s2(2 * h, std::vector<std::int64_t>(2 * h));
    IntBlock t2 = s2;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t q = 0; q < h; ++q) {
        s2[r][q] = s[r][q];
        s2[r][h + q] = -ss[r][q];
        s2[h + r][q] = s[r][q];
        s2[h + r][h + q] = ss[r][q];
        t2[r][q] = t[r][q];
        t2[r][h + q] = -(ts[r][q] + shift * ss[r][q]);
        t2[h + r][q] = t[r][q] + shift * s[r][q];
        t2[h + r][h + q] = ts[r][q];
      }
    }
    s = std::move(s2);
    t = std::move(t2);
  }
  return {s, t};
}

}  // namespace detail

/// Orthogonal LHD with n = r 2^(c+1) runs (plus a center run when
/// `plus_one`) and k = 2^c factors.
inline DesignMatrix olhd_sun2010(int c, int r, bool plus_one) {
  if (c < 1) fail(ErrorCode::invalid_parameter, "c must be >= 1");
  if (r < 1) fail(ErrorCode::invalid_parameter, "r must be >= 1");
  if (c > 12 || static_cast<std::int64_t>(r) << (c + 1) > (std::int64_t{1} << 24)) {
    fail(ErrorCode::invalid_parameter, "design too large");
  }
  const auto [s, t] = detail::sun_blocks(c);
  const std::size_t half = s.size();
  const std::int64_t block_shift = std::int64_t{1} << c;
  // H stacks T + j 2^c S for j = 0..r-1; |H| covers 1..r 2^c per column.
  detail::IntBlock h;
  for (int j = 0; j < r; ++j) {
    for (std::size_t row = 0; row < half; ++row) {
      std::vector<std::int64_t> v(half);
      for (std::size_t col = 0; col < half; ++col) v[col] = t[row][col] + j * block_shift * s[row][col];
      if (!plus_one) {
        // 2H - S moves levels to the odd integers +-1, +-3, ...
        for (std::size_t col = 0; col < half; ++col) v[col] = 2 * v[col] - s[row][col];
      }
      h.push_back(std::move(v));
    }
  }
  std::vector<std::vector<std::int64_t>> columns(half);
  for (std::size_t col = 0; col < half; ++col) {
    for (const auto& row : h) columns[col].push_back(row[col]);
    if (plus_one) columns[col].push_back(0);
    for (const auto& row : h) columns[col].push_back(-row[col]);
  }
  return detail::from_centered(columns, plus_one ? 1 : 2);
}

/// n x k LHD from Williams-transformed linear permutations: column h holds
/// W(h * i mod n) + 1 for rows i = 1..n. For k <= (n-1)/2 the columns are
/// mutually orthogonal in the cosine terms cos(pi x) and cos(2 pi x).
inline DesignMatrix olhd_butler2001(int n, int k) {
  if (n % 2 == 0 || !is_prime(n)) fail(ErrorCode::invalid_parameter, "n must be an odd prime");
  if (k < 1 || k > n - 1) fail(ErrorCode::invalid_parameter, "k must satisfy 1 <= k <= n-1");
  IntMatrix cells(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
  std::vector<level_t> residues(static_cast<std::size_t>(n));
  for (int h = 1; h <= k; ++h) {
    for (int i = 1; i <= n; ++i) residues[static_cast<std::size_t>(i - 1)] = static_cast<level_t>((std::int64_t{h} * i) % n);
    const auto w = williams_transform(residues, n);
    for (std::size_t r = 0; r < w.size(); ++r) cells(r, static_cast<std::size_t>(h - 1)) = w[r] + 1;
  }
  return DesignMatrix::from_cells(std::move(cells));
}

/// Couples an n x p base LHD with an OA(n^2, 2f, n, 2).
///
/// Each OA column pair (a, b) and each base column j yields two columns
/// n x + y and -x + n y on centered levels, where x and y are the base
/// levels selected by the symbols in a and b. Output: n^2 x 2fp.
/// Orthogonality of the base carries over to the output.
inline DesignMatrix olhd_lin2009(const DesignMatrix& base, const OrthogonalArray& oa) {
  const std::size_t n = base.runs();
  const std::size_t p = base.factors();
  if (oa.runs() != n * n) fail(ErrorCode::dimension_mismatch, "OA must have n^2 runs");
  if (static_cast<std::size_t>(oa.levels()) != n) fail(ErrorCode::dimension_mismatch, "OA must have n levels");
  if (oa.columns() % 2 != 0) fail(ErrorCode::dimension_mismatch, "OA must have an even number of columns");
  const auto centered = [&](std::size_t symbol, std::size_t col) {
    // Doubled centering keeps even n on integers.
    return 2 * static_cast<std::int64_t>(base(symbol - 1, col)) - static_cast<std::int64_t>(n) - 1;
  };
  const auto nn = static_cast<std::int64_t>(n);
  std::vector<std::vector<std::int64_t>> columns;
  for (std::size_t pair = 0; pair < oa.columns() / 2; ++pair) {
    std::vector<std::vector<std::int64_t>> first(p), second(p);
    for (std::size_t r = 0; r < oa.runs(); ++r) {
      const auto a = static_cast<std::size_t>(oa(r, 2 * pair));
      const auto b = static_cast<std::size_t>(oa(r, 2 * pair + 1));
      for (std::size_t j = 0; j < p; ++j) {
        const std::int64_t x = centered(a, j);
        const std::int64_t y = centered(b, j);
        first[j].push_back(nn * x + y);
        second[j].push_back(-x + nn * y);
      }
    }
    for (auto& col : first) columns.push_back(std::move(col));
    for (auto& col : second) columns.push_back(std::move(col));
  }
  return detail::from_centered(columns, 2);
}

namespace detail {

struct CatalogEntry {
  std::string_view name;
  int levels;
  int strength;
  std::uint64_t checksum;  // FNV-1a 64 of `csv`
  std::string_view csv;
};

inline constexpr int oa_catalog_version = 1;

inline constexpr std::array<CatalogEntry, 5> oa_catalog{{
    {"OA(4,3,2,2)", 2, 2, 0xcbedd6ae003cf3bdULL, "1,1,1\n1,2,2\n2,1,2\n2,2,1\n"},
    {"OA(8,4,2,3)", 2, 3, 0xc0ca3894cc6b74b5ULL,
     "1,1,1,1\n1,1,2,2\n1,2,1,2\n1,2,2,1\n2,1,1,2\n2,1,2,1\n2,2,1,1\n2,2,2,2\n"},
    {"OA(9,4,3,2)", 3, 2, 0x042c4b932ae56e5bULL,
     "1,1,1,1\n1,2,2,3\n1,3,3,2\n2,1,2,2\n2,2,3,1\n2,3,1,3\n3,1,3,3\n3,2,1,2\n3,3,2,1\n"},
    {"OA(16,5,4,2)", 4, 2, 0xdd09b19ef18671c5ULL,
     "1,1,1,1,1\n1,2,2,3,4\n1,3,3,4,2\n1,4,4,2,3\n2,1,2,2,2\n2,2,1,4,3\n2,3,4,3,1\n2,4,3,1,4\n"
     "3,1,3,3,3\n3,2,4,1,2\n3,3,1,2,4\n3,4,2,4,1\n4,1,4,4,4\n4,2,3,2,1\n4,3,2,1,3\n4,4,1,3,2\n"},
    {"OA(25,6,5,2)", 5, 2, 0xe5008494a77334bbULL,
     "1,1,1,1,1,1\n1,2,2,3,4,5\n1,3,3,5,2,4\n1,4,4,2,5,3\n1,5,5,4,3,2\n"
     "2,1,2,2,2,2\n2,2,3,4,5,1\n2,3,4,1,3,5\n2,4,5,3,1,4\n2,5,1,5,4,3\n"
     "3,1,3,3,3,3\n3,2,4,5,1,2\n3,3,5,2,4,1\n3,4,1,4,2,5\n3,5,2,1,5,4\n"
     "4,1,4,4,4,4\n4,2,5,1,2,3\n4,3,1,3,5,2\n4,4,2,5,3,1\n4,5,3,2,1,5\n"
     "5,1,5,5,5,5\n5,2,1,2,3,4\n5,3,2,4,1,3\n5,4,3,1,4,2\n5,5,4,3,2,1\n"},
}};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

inline std::vector<std::string> oa_catalog_names() {
  std::vector<std::string> names;
  for (const auto& e : detail::oa_catalog) names.emplace_back(e.name);
  return names;
}

/// Bundled OA by name, checksum- and balance-verified on every load.
inline OrthogonalArray good_oa_catalog(std::string_view name) {
  for (const auto& e : detail::oa_catalog) {
    if (e.name != name) continue;
    if (detail::fnv1a64(e.csv) != e.checksum) {
      fail(ErrorCode::invalid_oa, "catalog entry " + std::string(name) + " failed its checksum");
    }
    return OrthogonalArray::from_cells(parse_int_csv(e.csv), e.levels, e.strength);
  }
  fail(ErrorCode::unknown_name, "no bundled orthogonal array named '" + std::string(name) + "'");
}

}  // namespace lhd
