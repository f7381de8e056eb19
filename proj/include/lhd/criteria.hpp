#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lhd/design.hpp"
#include "lhd/error.hpp"

namespace lhd {

enum class CriterionKind { phi_p, maxpro, avg_abs_cor, max_abs_cor, weighted_combo };

inline std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::phi_p: return "phi_p";
    case CriterionKind::maxpro: return "maxpro";
    case CriterionKind::avg_abs_cor: return "avgcor";
    case CriterionKind::max_abs_cor: return "maxcor";
    case CriterionKind::weighted_combo: return "combo";
  }
  return "unknown";
}

inline CriterionKind parse_criterion_kind(std::string_view name) {
  for (auto kind : {CriterionKind::phi_p, CriterionKind::maxpro, CriterionKind::avg_abs_cor,
                    CriterionKind::max_abs_cor, CriterionKind::weighted_combo}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::unknown_name, "unknown criterion '" + std::string(name) + "'");
}

/// Declarative objective. All kinds are minimized.
///
/// For weighted_combo the objective is
///   w * (mean squared column correlation) + (1 - w) * (phi_p - L) / (U - L)
/// with L = phi_lower_proxy(n, k, p, q) and U = phi_upper, which searches pin
/// to phi_p of their starting design.
struct CriterionSpec {
  CriterionKind kind = CriterionKind::phi_p;
  int p = 15;
  int q = 1;
  double weight = 0.5;
  std::optional<double> phi_upper;

  static CriterionSpec of(CriterionKind kind, int p = 15, int q = 1, double weight = 0.5) {
    CriterionSpec spec;
    spec.kind = kind;
    spec.p = p;
    spec.q = q;
    spec.weight = weight;
    return spec;
  }
  static CriterionSpec phi(int p = 15, int q = 1) { return of(CriterionKind::phi_p, p, q); }
  static CriterionSpec maxpro() { return of(CriterionKind::maxpro); }
  static CriterionSpec avg_cor() { return of(CriterionKind::avg_abs_cor); }
  static CriterionSpec max_cor() { return of(CriterionKind::max_abs_cor); }
  static CriterionSpec combo(double w, int p = 15, int q = 1) {
    return of(CriterionKind::weighted_combo, p, q, w);
  }

  std::string name() const { return std::string(to_string(kind)); }

  void check() const {
    if (p < 1) fail(ErrorCode::invalid_parameter, "phi_p exponent p must be >= 1");
    check_distance_exponent(q);
    if (!(weight >= 0.0 && weight <= 1.0)) {
      fail(ErrorCode::invalid_weight, "weight must lie in [0, 1]");
    }
  }

  friend bool operator==(const CriterionSpec&, const CriterionSpec&) = default;
};

inline constexpr double orthogonality_tolerance = 1e-12;

namespace detail {

inline double pair_count(std::size_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

// Largest scale s for which s^p stays far from overflow.
inline double phi_scale(double min_distance, int p) {
  return std::min(min_distance, std::exp2(600.0 / p));
}

inline double phi_from_scaled_sum(double scaled_sum, double scale, int p) {
  return std::pow(scaled_sum, 1.0 / p) / scale;
}

// Pearson numerator/denominator on integer sums: n*Sxy - Sx*Sy.
template <DesignLike D>
std::vector<std::int64_t> centered_cross_products(const D& design) {
  const std::size_t n = design.runs();
  const std::size_t k = design.factors();
  std::vector<std::int64_t> sums(k, 0);
  std::vector<std::int64_t> cross(k * k, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < k; ++a) {
      const std::int64_t xa = design(r, a);
      sums[a] += xa;
      for (std::size_t b = a; b < k; ++b) cross[a * k + b] += xa * design(r, b);
    }
  }
  const auto nn = static_cast<std::int64_t>(n);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a; b < k; ++b) {
      cross[a * k + b] = nn * cross[a * k + b] - sums[a] * sums[b];
      cross[b * k + a] = cross[a * k + b];
    }
  }
  return cross;
}

inline void require_two_columns(std::size_t k) {
  if (k < 2) fail(ErrorCode::too_few_columns, "correlation criteria need k >= 2");
}

}  // namespace detail

/// phi_p = (sum_{i<j} d_ij^-p)^(1/p), evaluated relative to the minimum
/// distance so large p neither underflows nor overflows.
template <DesignLike D>
double phi_p(const D& design, int p = 15, int q = 1) {
  check_distance_exponent(q);
  if (p < 1) fail(ErrorCode::invalid_parameter, "phi_p exponent p must be >= 1");
  const std::size_t n = design.runs();
  std::vector<double> dist;
  dist.reserve(n * (n - 1) / 2);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = raw_to_distance(raw_pair_distance(design, a, b, q), q);
      dist.push_back(d);
      dmin = std::min(dmin, d);
    }
  }
  if (dist.empty()) return 0.0;
  if (dmin == 0.0) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double d : dist) sum += std::pow(dmin / d, p);
  return std::pow(sum, 1.0 / p) / dmin;
}

/// Maximum projection criterion
///   psi = ( C(n,2)^-1 * sum_{i<j} prod_l (x_il - x_jl)^-2 )^(1/k).
template <DesignLike D>
double maxpro_psi(const D& design) {
  const std::size_t n = design.runs();
  const std::size_t k = design.factors();
  double sum = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double term = 1.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double diff = static_cast<double>(design(a, c)) - design(b, c);
        if (diff == 0.0) {
          fail(ErrorCode::degenerate_coordinate,
               "rows " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                   " share a level in column " + std::to_string(c + 1));
        }
        term /= diff * diff;
      }
      sum += term;
    }
  }
  return std::pow(sum / detail::pair_count(n), 1.0 / static_cast<double>(k));
}

template <DesignLike D>
RealMatrix column_correlations(const D& design) {
  const std::size_t k = design.factors();
  const auto cross = detail::centered_cross_products(design);
  RealMatrix out(k, k, 1.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double denom = std::sqrt(static_cast<double>(cross[a * k + a]) *
                                     static_cast<double>(cross[b * k + b]));
      out(a, b) = out(b, a) = static_cast<double>(cross[a * k + b]) / denom;
    }
  }
  return out;
}

struct CorrelationSummary {
  double avg_abs = 0.0;
  double max_abs = 0.0;
  double avg_sq = 0.0;
};

template <DesignLike D>
CorrelationSummary correlation_summary(const D& design) {
  const std::size_t k = design.factors();
  detail::require_two_columns(k);
  const auto rho = column_correlations(design);
  CorrelationSummary s;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      const double v = std::abs(rho(a, b));
      s.avg_abs += v;
      s.avg_sq += v * v;
      s.max_abs = std::max(s.max_abs, v);
    }
  }
  const double pairs = detail::pair_count(k);
  s.avg_abs /= pairs;
  s.avg_sq /= pairs;
  return s;
}

template <DesignLike D>
double avg_abs_cor(const D& design) { return correlation_summary(design).avg_abs; }

template <DesignLike D>
double max_abs_cor(const D& design) { return correlation_summary(design).max_abs; }

template <DesignLike D>
double avg_sq_cor(const D& design) { return correlation_summary(design).avg_sq; }

template <DesignLike D>
bool is_orthogonal(const D& design) {
  return max_abs_cor(design) <= orthogonality_tolerance;
}

/// Lower proxy L for phi_p: every pair at the mean LHD pair distance.
/// For q = 1 the mean L1 distance of any LHD is exactly k(n+1)/3; for q = 2
/// the RMS distance sqrt(k n (n+1) / 6) is used. Both bound phi_p from below.
inline double phi_lower_proxy(std::size_t n, std::size_t k, int p, int q) {
  check_distance_exponent(q);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double mean_distance = q == 1 ? kd * (nd + 1.0) / 3.0 : std::sqrt(kd * nd * (nd + 1.0) / 6.0);
  return std::pow(detail::pair_count(n), 1.0 / p) / mean_distance;
}

namespace detail {

inline double normalized_phi(double phi, double lower, double upper) {
  if (upper <= lower) return 0.0;
  return (phi - lower) / (upper - lower);
}

inline double combine(double weight, double avg_sq, double normalized) {
  return weight * avg_sq + (1.0 - weight) * normalized;
}

}  // namespace detail

/// Multi-objective criterion; spec.phi_upper must be set.
template <DesignLike D>
double weighted_objective(const D& design, const CriterionSpec& spec) {
  spec.check();
  if (!spec.phi_upper) fail(ErrorCode::invalid_config, "weighted objective needs phi_upper (U)");
  const double lower = phi_lower_proxy(design.runs(), design.factors(), spec.p, spec.q);
  const double normalized = detail::normalized_phi(phi_p(design, spec.p, spec.q), lower, *spec.phi_upper);
  return detail::combine(spec.weight, avg_sq_cor(design), normalized);
}

template <DesignLike D>
double evaluate(const D& design, const CriterionSpec& spec) {
  spec.check();
  switch (spec.kind) {
    case CriterionKind::phi_p: return phi_p(design, spec.p, spec.q);
    case CriterionKind::maxpro: return maxpro_psi(design);
    case CriterionKind::avg_abs_cor: return avg_abs_cor(design);
    case CriterionKind::max_abs_cor: return max_abs_cor(design);
    case CriterionKind::weighted_combo: return weighted_objective(design, spec);
  }
  return 0.0;
}

/// Criterion value that tracks single within-column swaps in O(n k) instead
/// of the O(n^2 k) full evaluation.
///
/// propose() prices a swap without applying it; accept() commits the most
/// recent proposal. For weighted_combo an unset phi_upper is pinned to phi_p
/// of the design the evaluator starts from.
class IncrementalEvaluator {
 public:
  IncrementalEvaluator(DesignMatrix design, CriterionSpec spec)
      : design_(std::move(design)), spec_(spec) {
    spec_.check();
    const bool distance = spec_.kind == CriterionKind::phi_p || spec_.kind == CriterionKind::weighted_combo;
    const bool correlation = spec_.kind == CriterionKind::avg_abs_cor ||
                             spec_.kind == CriterionKind::max_abs_cor ||
                             spec_.kind == CriterionKind::weighted_combo;
    if (correlation) detail::require_two_columns(design_.factors());
    if (distance) distance_.emplace(design_, spec_.p, spec_.q);
    if (spec_.kind == CriterionKind::maxpro) projection_.emplace(design_);
    if (correlation) correlation_.emplace(design_);
    if (spec_.kind == CriterionKind::weighted_combo) {
      lower_ = phi_lower_proxy(design_.runs(), design_.factors(), spec_.p, spec_.q);
      if (!spec_.phi_upper) spec_.phi_upper = distance_->value();
    }
    value_ = current_value();
  }

  const DesignMatrix& design() const noexcept { return design_; }
  const CriterionSpec& spec() const noexcept { return spec_; }
  double value() const noexcept { return value_; }

  double propose(std::size_t column, std::size_t i, std::size_t j) {
    if (column >= design_.factors() || i >= design_.runs() || j >= design_.runs()) {
      fail(ErrorCode::index_out_of_range, "exchange index out of range");
    }
    pending_ = Move{column, i, j};
    if (i == j) {
      pending_value_ = value_;
      return value_;
    }
    if (distance_) distance_->propose(design_, column, i, j);
    if (projection_) projection_->propose(design_, column, i, j);
    if (correlation_) correlation_->propose(design_, column, i, j);
    pending_value_ = combine(true);
    return pending_value_;
  }

  void accept() {
    if (!pending_) return;
    const auto [column, i, j] = *pending_;
    pending_.reset();
    if (i == j) return;
    design_.swap_in_column(column, i, j);
    if (distance_) distance_->accept();
    if (projection_) projection_->accept();
    if (correlation_) correlation_->accept();
    if (++accepted_since_refresh_ >= refresh_interval()) {
      accepted_since_refresh_ = 0;
      if (distance_) distance_->refresh();
      if (projection_) projection_->refresh();
      value_ = current_value();
    } else {
      value_ = pending_value_;
    }
  }

 private:
  struct Move {
    std::size_t column, i, j;
  };

  // Pair terms (s / d_ij)^p held over the full n x n grid.
  class DistanceState {
   public:
    DistanceState(const DesignMatrix& d, int p, int q) : n_(d.runs()), p_(p), q_(q), raw_(n_ * n_, 0) {
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) {
          raw_[a * n_ + b] = raw_[b * n_ + a] = raw_pair_distance(d, a, b, q_);
        }
      }
      refresh();
    }

    void refresh() {
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) dmin = std::min(dmin, raw_to_distance(raw_[a * n_ + b], q_));
      }
      scale_ = detail::phi_scale(dmin, p_);
      terms_.assign(n_ * n_, 0.0);
      sum_ = 0.0;
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) {
          terms_[a * n_ + b] = term(raw_[a * n_ + b]);
          sum_ += terms_[a * n_ + b];
        }
      }
    }

    double value() const { return detail::phi_from_scaled_sum(sum_, scale_, p_); }
    double pending_value() const { return detail::phi_from_scaled_sum(pending_sum_, scale_, p_); }

    void propose(const DesignMatrix& d, std::size_t column, std::size_t i, std::size_t j) {
      changes_.clear();
      pending_sum_ = sum_;
      const std::int64_t xi = d(i, column);
      const std::int64_t xj = d(j, column);
      for (std::size_t r = 0; r < n_; ++r) {
        if (r == i || r == j) continue;
        const std::int64_t xr = d(r, column);
        const std::int64_t gi = gap(xi - xr);
        const std::int64_t gj = gap(xj - xr);
        const std::int64_t raw_i = raw_[i * n_ + r] - gi + gj;
        const std::int64_t raw_j = raw_[j * n_ + r] - gj + gi;
        const double ti = term(raw_i);
        const double tj = term(raw_j);
        pending_sum_ += (ti - terms_[at(i, r)]) + (tj - terms_[at(j, r)]);
        changes_.push_back({r, raw_i, raw_j, ti, tj});
      }
      i_ = i;
      j_ = j;
    }

    void accept() {
      for (const auto& c : changes_) {
        raw_[i_ * n_ + c.r] = raw_[c.r * n_ + i_] = c.raw_i;
        raw_[j_ * n_ + c.r] = raw_[c.r * n_ + j_] = c.raw_j;
        terms_[at(i_, c.r)] = c.term_i;
        terms_[at(j_, c.r)] = c.term_j;
      }
      sum_ = pending_sum_;
      changes_.clear();
    }

   private:
    struct Change {
      std::size_t r;
      std::int64_t raw_i, raw_j;
      double term_i, term_j;
    };

    std::int64_t gap(std::int64_t diff) const { return q_ == 1 ? (diff < 0 ? -diff : diff) : diff * diff; }
    double term(std::int64_t raw) const { return std::pow(scale_ / raw_to_distance(raw, q_), p_); }
    std::size_t at(std::size_t a, std::size_t b) const { return a < b ? a * n_ + b : b * n_ + a; }

    std::size_t n_;
    int p_, q_;
    std::vector<std::int64_t> raw_;
    std::vector<double> terms_;
    double scale_ = 1.0;
    double sum_ = 0.0;
    double pending_sum_ = 0.0;
    std::vector<Change> changes_;
    std::size_t i_ = 0, j_ = 0;
  };

  // Pair terms prod_l (x_al - x_bl)^-2.
  class ProjectionState {
   public:
    explicit ProjectionState(const DesignMatrix& d) : n_(d.runs()), k_(d.factors()), terms_(n_ * n_, 0.0) {
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) terms_[a * n_ + b] = pair_term(d, a, b);
      }
      refresh();
    }

    void refresh() {
      sum_ = 0.0;
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) sum_ += terms_[a * n_ + b];
      }
    }

    double value() const { return psi(sum_); }
    double pending_value() const { return psi(pending_sum_); }

    void propose(const DesignMatrix& d, std::size_t column, std::size_t i, std::size_t j) {
      changes_.clear();
      pending_sum_ = sum_;
      const level_t xi = d(i, column);
      const level_t xj = d(j, column);
      for (std::size_t r = 0; r < n_; ++r) {
        if (r == i || r == j) continue;
        const double ti = pair_term(d, i, r, Override{column, xj});
        const double tj = pair_term(d, j, r, Override{column, xi});
        pending_sum_ += (ti - terms_[at(i, r)]) + (tj - terms_[at(j, r)]);
        changes_.push_back({r, ti, tj});
      }
      i_ = i;
      j_ = j;
    }

    void accept() {
      for (const auto& c : changes_) {
        terms_[at(i_, c.r)] = c.term_i;
        terms_[at(j_, c.r)] = c.term_j;
      }
      sum_ = pending_sum_;
      changes_.clear();
    }

   private:
    struct Change {
      std::size_t r;
      double term_i, term_j;
    };

    struct Override {
      std::size_t column;
      level_t value;
    };

    // Row a reads `value` in `column` when an override is given.
    static double pair_term(const DesignMatrix& d, std::size_t a, std::size_t b,
                            std::optional<Override> o = std::nullopt) {
      double t = 1.0;
      for (std::size_t c = 0; c < d.factors(); ++c) {
        const level_t xa = (o && c == o->column) ? o->value : d(a, c);
        const double diff = static_cast<double>(xa) - d(b, c);
        t /= diff * diff;
      }
      return t;
    }

    double psi(double sum) const {
      return std::pow(sum / detail::pair_count(n_), 1.0 / static_cast<double>(k_));
    }
    std::size_t at(std::size_t a, std::size_t b) const { return a < b ? a * n_ + b : b * n_ + a; }

    std::size_t n_, k_;
    std::vector<double> terms_;
    double sum_ = 0.0;
    double pending_sum_ = 0.0;
    std::vector<Change> changes_;
    std::size_t i_ = 0, j_ = 0;
  };

  // Exact integer cross products; all LHD columns share mean and variance.
  class CorrelationState {
   public:
    explicit CorrelationState(const DesignMatrix& d)
        : k_(d.factors()), cross_(detail::centered_cross_products(d)), pending_(cross_) {
      const auto n = static_cast<std::int64_t>(d.runs());
      variance_ = static_cast<double>(n * n * (n * n - 1) / 12);
    }

    CorrelationSummary summary(bool pending) const {
      const auto& cross = pending ? pending_ : cross_;
      CorrelationSummary s;
      for (std::size_t a = 0; a < k_; ++a) {
        for (std::size_t b = a + 1; b < k_; ++b) {
          const double v = std::abs(static_cast<double>(cross[a * k_ + b]) / variance_);
          s.avg_abs += v;
          s.avg_sq += v * v;
          s.max_abs = std::max(s.max_abs, v);
        }
      }
      const double pairs = detail::pair_count(k_);
      s.avg_abs /= pairs;
      s.avg_sq /= pairs;
      return s;
    }

    void propose(const DesignMatrix& d, std::size_t column, std::size_t i, std::size_t j) {
      pending_ = cross_;
      const auto n = static_cast<std::int64_t>(d.runs());
      const std::int64_t shift = static_cast<std::int64_t>(d(j, column)) - d(i, column);
      for (std::size_t b = 0; b < k_; ++b) {
        if (b == column) continue;
        const std::int64_t delta = n * shift * (static_cast<std::int64_t>(d(i, b)) - d(j, b));
        pending_[column * k_ + b] += delta;
        pending_[b * k_ + column] += delta;
      }
    }

    void accept() { cross_ = pending_; }

   private:
    std::size_t k_;
    std::vector<std::int64_t> cross_;
    std::vector<std::int64_t> pending_;
    double variance_ = 1.0;
  };

  std::size_t refresh_interval() const { return std::max<std::size_t>(64, design_.runs()); }

  double current_value() const { return combine(false); }

  double combine(bool pending) const {
    switch (spec_.kind) {
      case CriterionKind::phi_p:
        return pending ? distance_->pending_value() : distance_->value();
      case CriterionKind::maxpro:
        return pending ? projection_->pending_value() : projection_->value();
      case CriterionKind::avg_abs_cor:
        return correlation_->summary(pending).avg_abs;
      case CriterionKind::max_abs_cor:
        return correlation_->summary(pending).max_abs;
      case CriterionKind::weighted_combo: {
        const double phi = pending ? distance_->pending_value() : distance_->value();
        return detail::combine(spec_.weight, correlation_->summary(pending).avg_sq,
                               detail::normalized_phi(phi, lower_, *spec_.phi_upper));
      }
    }
    return 0.0;
  }

  DesignMatrix design_;
  CriterionSpec spec_;
  std::optional<DistanceState> distance_;
  std::optional<ProjectionState> projection_;
  std::optional<CorrelationState> correlation_;
  double lower_ = 0.0;
  double value_ = 0.0;
  double pending_value_ = 0.0;
  std::optional<Move> pending_;
  std::size_t accepted_since_refresh_ = 0;
};

/// Criterion value of exchange(design, column, i, j) via the incremental path.
inline double delta_after_exchange(const DesignMatrix& design, const CriterionSpec& spec,
                                   std::size_t column, std::size_t i, std::size_t j) {
  IncrementalEvaluator evaluator(design, spec);
  return evaluator.propose(column, i, j);
}

}  // namespace lhd
