#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "lhd/lhd.hpp"
#include "oracles.hpp"

using namespace lhd;

namespace {

void expect_olhd(const DesignMatrix& d, std::size_t n, std::size_t k) {
  EXPECT_EQ(d.runs(), n);
  EXPECT_EQ(d.factors(), k);
  EXPECT_TRUE(validate(d.cells()).ok());
  EXPECT_LE(max_abs_cor(d), 1e-12);
  EXPECT_LE(oracle::correlations(d).max_abs, 1e-12);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::io;
}

}  // namespace

TEST(Ye1998, Sizes) {
  expect_olhd(olhd_ye1998(2), 5, 2);
  expect_olhd(olhd_ye1998(3), 9, 4);
  for (int m = 4; m <= 7; ++m) expect_olhd(olhd_ye1998(m), (1u << m) + 1, 2 * m - 2);
  EXPECT_EQ(code_of([] { olhd_ye1998(1); }), ErrorCode::invalid_parameter);
}

TEST(Cioppa2007, Sizes) {
  expect_olhd(olhd_cioppa2007(2), 5, 2);
  expect_olhd(olhd_cioppa2007(3), 9, 4);
  expect_olhd(olhd_cioppa2007(4), 17, 7);
  for (int m = 5; m <= 7; ++m) expect_olhd(olhd_cioppa2007(m), (1u << m) + 1, m + (m - 1) * (m - 2) / 2);
  EXPECT_EQ(code_of([] { olhd_cioppa2007(1); }), ErrorCode::invalid_parameter);
}

TEST(Cioppa2007, ExtendsYe) {
  for (int m = 2; m <= 6; ++m) {
    const auto ye = olhd_ye1998(m);
    const auto ci = olhd_cioppa2007(m);
    EXPECT_GE(ci.factors(), ye.factors());
  }
}

TEST(Sun2010, Examples) {
  expect_olhd(olhd_sun2010(1, 1, false), 4, 2);
  expect_olhd(olhd_sun2010(1, 1, true), 5, 2);
  expect_olhd(olhd_sun2010(2, 3, false), 24, 4);
}

TEST(Sun2010, Grid) {
  for (int c = 1; c <= 4; ++c)
    for (int r = 1; r <= 4; ++r)
      for (bool center : {false, true}) {
        const std::size_t n = static_cast<std::size_t>(r) << (c + 1);
        expect_olhd(olhd_sun2010(c, r, center), n + (center ? 1 : 0), 1u << c);
      }
  EXPECT_EQ(code_of([] { olhd_sun2010(0, 1, false); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code_of([] { olhd_sun2010(1, 0, false); }), ErrorCode::invalid_parameter);
}

TEST(Butler2001, ShapeAndValidity) {
  for (int n : {5, 7, 11, 13}) {
    for (int k = 1; k <= n - 1; ++k) {
      const auto d = olhd_butler2001(n, k);
      EXPECT_EQ(d.runs(), static_cast<std::size_t>(n));
      EXPECT_EQ(d.factors(), static_cast<std::size_t>(k));
      EXPECT_TRUE(validate(d.cells()).ok());
    }
  }
}

// Columns are orthogonal after mapping levels through cos(pi (x - 1/2) / n),
// for the first (n - 1) / 2 generators.
TEST(Butler2001, CosineModelOrthogonality) {
  for (int n : {5, 7, 11, 13, 17}) {
    const int k = (n - 1) / 2;
    const auto d = olhd_butler2001(n, k);
    std::vector<std::vector<double>> cols(k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < n; ++r) cols[c].push_back(std::cos(std::numbers::pi * (d(r, c) - 0.5) / n));
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) EXPECT_NEAR(oracle::pearson(cols[a], cols[b]), 0.0, 1e-12) << n;
  }
}

TEST(Butler2001, Errors) {
  try {
    olhd_butler2001(9, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
    EXPECT_NE(std::string(e.what()).find("n must be an odd prime"), std::string::npos);
  }
  EXPECT_THROW(olhd_butler2001(2, 1), Error);
  EXPECT_THROW(olhd_butler2001(5, 5), Error);
  EXPECT_THROW(olhd_butler2001(5, 0), Error);
}

TEST(Williams, Examples) {
  const std::vector<level_t> five{0, 1, 2, 3, 4};
  EXPECT_EQ(williams_transform(five, 5), (std::vector<level_t>{0, 2, 4, 3, 1}));
  const std::vector<level_t> three{0, 1, 2};
  EXPECT_EQ(williams_transform(three, 3), (std::vector<level_t>{0, 2, 1}));
  const std::vector<level_t> bad{0, 5};
  EXPECT_EQ(code_of([&] { williams_transform(bad, 5); }), ErrorCode::out_of_range_entry);
}

TEST(Williams, Bijective) {
  RngStream rng(50, 0);
  for (level_t n = 1; n <= 50; ++n) {
    std::vector<level_t> x(n);
    std::iota(x.begin(), x.end(), 0);
    rng.shuffle(std::span<level_t>(x));
    auto w = williams_transform(x, n);
    std::sort(w.begin(), w.end());
    for (level_t i = 0; i < n; ++i) ASSERT_EQ(w[i], i);
  }
}

TEST(OrthogonalArray, RejectsUnbalanced) {
  EXPECT_EQ(code_of([] { OrthogonalArray::from_cells(IntMatrix{{1, 1}, {1, 2}, {2, 1}}, 2); }), ErrorCode::invalid_oa);
  EXPECT_EQ(code_of([] { OrthogonalArray::from_cells(IntMatrix{{1, 1}, {1, 2}, {1, 1}, {2, 2}}, 2); }),
            ErrorCode::invalid_oa);
  EXPECT_EQ(code_of([] { OrthogonalArray::from_cells(IntMatrix{{1, 1}, {1, 2}, {2, 1}, {2, 3}}, 2); }),
            ErrorCode::invalid_oa);
}

TEST(OaToLhd, DeterministicExample) {
  const auto oa = OrthogonalArray::from_cells(IntMatrix{{1, 1}, {1, 2}, {2, 1}, {2, 2}}, 2);
  EXPECT_EQ(oa_to_lhd(oa), DesignMatrix::from_rows({{1, 1}, {2, 3}, {3, 2}, {4, 4}}));
}

TEST(OaToLhd, CollapsesBack) {
  for (const auto& name : oa_catalog_names()) {
    const auto oa = good_oa_catalog(name);
    EXPECT_EQ(collapse_to_oa(oa_to_lhd(oa), oa.levels()), oa.cells()) << name;
    RngStream rng(60, 0);
    for (int t = 0; t < 20; ++t) EXPECT_EQ(collapse_to_oa(oa_to_lhd(oa, rng), oa.levels()), oa.cells()) << name;
  }
}

TEST(Catalog, Entries) {
  const auto oa9 = good_oa_catalog("OA(9,4,3,2)");
  EXPECT_EQ(oa9.runs(), 9u);
  EXPECT_EQ(oa9.columns(), 4u);
  EXPECT_EQ(oa9.levels(), 3);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) {
      std::set<std::pair<int, int>> pairs;
      for (std::size_t r = 0; r < 9; ++r) pairs.insert({oa9(r, a), oa9(r, b)});
      EXPECT_EQ(pairs.size(), 9u);
    }
  const auto oa4 = good_oa_catalog("OA(4,3,2,2)");
  EXPECT_EQ(oa4.runs(), 4u);
  EXPECT_EQ(oa4.columns(), 3u);
  EXPECT_EQ(good_oa_catalog("OA(8,4,2,3)").strength(), 3);
  EXPECT_EQ(oa_catalog_names().size(), 5u);
  EXPECT_EQ(code_of([] { good_oa_catalog("OA(7,7,7,7)"); }), ErrorCode::unknown_name);
}

TEST(Lin2009, YeBaseWithOa25) {
  const auto d = olhd_lin2009(olhd_ye1998(2), good_oa_catalog("OA(25,6,5,2)"));
  // 6 OA columns -> 3 pairs, 2 base columns, 2 output columns per (pair, base column).
  expect_olhd(d, 25, 12);
}

TEST(Lin2009, SunBaseWithOa16) {
  const auto full = good_oa_catalog("OA(16,5,4,2)");
  IntMatrix four(16, 4);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 4; ++c) four(r, c) = full(r, c);
  expect_olhd(olhd_lin2009(olhd_sun2010(1, 1, false), OrthogonalArray::from_cells(four, 4)), 16, 8);
}

TEST(Lin2009, Mismatch) {
  EXPECT_EQ(code_of([] { olhd_lin2009(olhd_ye1998(2), good_oa_catalog("OA(9,4,3,2)")); }),
            ErrorCode::dimension_mismatch);
  EXPECT_EQ(code_of([] { olhd_lin2009(olhd_sun2010(1, 1, false), good_oa_catalog("OA(16,5,4,2)")); }),
            ErrorCode::dimension_mismatch);
}
