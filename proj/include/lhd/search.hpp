#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhd/constructions.hpp"
#include "lhd/criteria.hpp"
#include "lhd/design.hpp"
#include "lhd/error.hpp"
#include "lhd/rng.hpp"

namespace lhd {

enum class Algorithm { sa, oasa, sa_multiobj, sa_sliced, ga, lapso };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sa: return "sa";
    case Algorithm::oasa: return "oasa";
    case Algorithm::sa_multiobj: return "sa-multiobj";
    case Algorithm::sa_sliced: return "sa-sliced";
    case Algorithm::ga: return "ga";
    case Algorithm::lapso: return "lapso";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::sa, Algorithm::oasa, Algorithm::sa_multiobj, Algorithm::sa_sliced,
                 Algorithm::ga, Algorithm::lapso}) {
    if (name == to_string(a)) return a;
  }
  fail(ErrorCode::unknown_name, "unknown algorithm '" + std::string(name) + "'");
}

struct SaParams {
  std::optional<double> t0;                         // default 0.1 * initial value
  double alpha = 0.95;                              // geometric cooling factor
  std::optional<std::size_t> moves_per_temperature; // default 10 * k
  bool random_column = false;                       // default cycles columns 1..k
};

struct GaParams {
  std::size_t population = 20;
  std::optional<double> pmut;  // default 1 / k
  std::vector<DesignMatrix> initial_population;  // empty: random
};

struct LapsoParams {
  std::size_t swarm = 10;
  std::optional<std::size_t> same_p;  // default ceil(n / 4)
  std::optional<std::size_t> same_g;  // default ceil(n / 4)
  std::optional<double> pmut;         // default 1 / k
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::sa;
  std::uint64_t max_evaluations = 10000;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  SaParams sa;
  GaParams ga;
  LapsoParams lapso;
  std::optional<SliceStructure> slices;  // sa-sliced
  double weight = 0.5;                   // sa-multiobj
  std::optional<OrthogonalArray> oa;     // oasa

  // Called with every design the optimizer evaluates. Test hook; leave empty
  // in production runs since proposals are otherwise never materialized.
  std::function<void(const DesignMatrix&)> on_visit;

  void check() const {
    if (max_evaluations == 0) fail(ErrorCode::invalid_config, "budget must be positive");
    if (!(sa.alpha > 0.0 && sa.alpha < 1.0)) fail(ErrorCode::invalid_config, "cooling rate must lie in (0, 1)");
    if (sa.t0 && !(*sa.t0 > 0.0)) fail(ErrorCode::invalid_config, "initial temperature must be positive");
    if (sa.moves_per_temperature && *sa.moves_per_temperature == 0) {
      fail(ErrorCode::invalid_config, "moves per temperature must be positive");
    }
    const auto probability = [](const std::optional<double>& p) { return !p || (*p >= 0.0 && *p <= 1.0); };
    if (!probability(ga.pmut) || !probability(lapso.pmut)) {
      fail(ErrorCode::invalid_config, "mutation probability must lie in [0, 1]");
    }
    if (ga.population < 4 || ga.population % 2 != 0) {
      fail(ErrorCode::invalid_config, "GA population must be an even number >= 4");
    }
    if (lapso.swarm < 2) fail(ErrorCode::invalid_config, "swarm size must be >= 2");
    if (!(weight >= 0.0 && weight <= 1.0)) fail(ErrorCode::invalid_weight, "weight must lie in [0, 1]");
  }
};

struct TracePoint {
  std::uint64_t evaluation;
  double best_value;
  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct SearchResult {
  DesignMatrix best;
  double value = 0.0;
  std::uint64_t evaluations_used = 0;
  std::vector<TracePoint> trace;
  std::chrono::duration<double, std::milli> elapsed{};
  OptimizerConfig config_echo;
  CriterionSpec criterion;
  std::map<std::string, double> components;  // constituent values (sa-multiobj)
};

/// Moves `column` toward `target` with up to `swaps` exchanges. Each swap
/// picks a disagreeing position uniformly and swaps in the level the target
/// holds there, so the Hamming distance drops by at least one per swap.
inline void move_toward(std::vector<level_t>& column, std::span<const level_t> target, std::size_t swaps,
                        RngStream& rng) {
  std::vector<std::size_t> differing;
  for (std::size_t s = 0; s < swaps; ++s) {
    differing.clear();
    for (std::size_t r = 0; r < column.size(); ++r) {
      if (column[r] != target[r]) differing.push_back(r);
    }
    if (differing.empty()) return;
    const std::size_t pos = differing[rng.uniform_below(differing.size())];
    const auto holder = std::find(column.begin(), column.end(), target[pos]);
    std::iter_swap(column.begin() + static_cast<std::ptrdiff_t>(pos), holder);
  }
}

namespace detail {

struct Move {
  std::size_t column, i, j;
};

struct Budget {
  std::uint64_t used = 0;
  std::uint64_t limit = 0;
  bool spent() const noexcept { return used >= limit; }
};

class Incumbent {
 public:
  void offer(const DesignMatrix& design, double value, std::uint64_t evaluation) {
    if (best_ && !(value < value_)) return;
    best_ = design;
    value_ = value;
    trace_.push_back({evaluation, value});
  }

  bool has_value() const noexcept { return best_.has_value(); }
  double value() const noexcept { return value_; }
  const DesignMatrix& best() const { return *best_; }
  std::vector<TracePoint>& trace() noexcept { return trace_; }

 private:
  std::optional<DesignMatrix> best_;
  double value_ = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> trace_;
};

inline void visit(const OptimizerConfig& config, const DesignMatrix& design) {
  if (config.on_visit) config.on_visit(design);
}

struct Schedule {
  double t0;
  double alpha;
  std::size_t moves_per_temperature;
};

inline Schedule resolve_schedule(const SaParams& sa, double initial_value, std::size_t k) {
  return {sa.t0.value_or(0.1 * initial_value), sa.alpha, sa.moves_per_temperature.value_or(10 * k)};
}

// Simulated annealing over exchange moves until `budget` reaches `stop_at`.
// Ties and improvements are always accepted; worse moves with probability
// exp(-delta / T). T shrinks by alpha after every M proposals.
template <class NextMove>
void anneal(IncrementalEvaluator& evaluator, Budget& budget, std::uint64_t stop_at, const Schedule& schedule,
            RngStream& rng, NextMove&& next_move, Incumbent* incumbent, const OptimizerConfig& config) {
  double temperature = schedule.t0;
  std::size_t proposals = 0;
  while (budget.used < stop_at && !budget.spent()) {
    const Move move = next_move(proposals);
    const double candidate = evaluator.propose(move.column, move.i, move.j);
    ++budget.used;
    if (config.on_visit) config.on_visit(exchange(evaluator.design(), move.column, move.i, move.j));
    const double delta = candidate - evaluator.value();
    bool accept = delta <= 0.0;
    if (!accept && temperature > 0.0) accept = rng.uniform01() < std::exp(-delta / temperature);
    if (accept) {
      evaluator.accept();
      if (incumbent) incumbent->offer(evaluator.design(), evaluator.value(), budget.used);
    }
    if (++proposals % schedule.moves_per_temperature == 0) temperature *= schedule.alpha;
  }
}

inline SearchResult finish(Incumbent& incumbent, const Budget& budget, const CriterionSpec& spec,
                           OptimizerConfig echo, std::chrono::steady_clock::time_point start) {
  echo.on_visit = nullptr;
  SearchResult result{incumbent.best(), incumbent.value(), budget.used, std::move(incumbent.trace()),
                      std::chrono::steady_clock::now() - start, std::move(echo), spec, {}};
  return result;
}

inline IncrementalEvaluator start_evaluator(const DesignMatrix& start, const CriterionSpec& spec, Budget& budget,
                                            Incumbent& incumbent, const OptimizerConfig& config) {
  IncrementalEvaluator evaluator(start, spec);
  ++budget.used;
  visit(config, start);
  incumbent.offer(evaluator.design(), evaluator.value(), budget.used);
  return evaluator;
}

inline void check_search_dimensions(std::size_t n, std::size_t k, const CriterionSpec& spec) {
  check_dimensions(n, k);
  spec.check();
  const bool needs_pairs = spec.kind == CriterionKind::avg_abs_cor || spec.kind == CriterionKind::max_abs_cor ||
                           spec.kind == CriterionKind::weighted_combo;
  if (needs_pairs && k < 2) fail(ErrorCode::too_few_columns, "correlation criteria need k >= 2");
}

}  // namespace detail

/// Simulated annealing from a random LHD; returns the best design visited.
inline SearchResult sa_search(std::size_t n, std::size_t k, const CriterionSpec& spec, OptimizerConfig config) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_search_dimensions(n, k, spec);
  config.check();
  RngStream rng(config.seed, config.stream_id);
  detail::Budget budget{0, config.max_evaluations};
  detail::Incumbent incumbent;
  auto evaluator = detail::start_evaluator(random_lhd(n, k, rng), spec, budget, incumbent, config);
  const auto schedule = detail::resolve_schedule(config.sa, evaluator.value(), k);
  config.sa.t0 = schedule.t0;
  config.sa.moves_per_temperature = schedule.moves_per_temperature;
  const bool random_column = config.sa.random_column;
  detail::anneal(
      evaluator, budget, budget.limit, schedule, rng,
      [&](std::size_t step) {
        const std::size_t column = random_column ? rng.uniform_below(k) : step % k;
        const auto [i, j] = rng.distinct_pair(n);
        return detail::Move{column, i, j};
      },
      &incumbent, config);
  return detail::finish(incumbent, budget, evaluator.spec(), std::move(config), start);
}

/// SA restricted to OA-based LHDs: a swap is proposed only between two rows
/// that hold the same symbol of the source array in that column.
inline SearchResult oasa_search(const OrthogonalArray& oa, const CriterionSpec& spec, OptimizerConfig config) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = oa.runs();
  const std::size_t k = oa.columns();
  detail::check_search_dimensions(n, k, spec);
  config.check();
  config.oa = oa;
  RngStream rng(config.seed, config.stream_id);
  detail::Budget budget{0, config.max_evaluations};
  detail::Incumbent incumbent;
  auto evaluator = detail::start_evaluator(oa_to_lhd(oa), spec, budget, incumbent, config);
  const auto schedule = detail::resolve_schedule(config.sa, evaluator.value(), k);
  config.sa.t0 = schedule.t0;
  config.sa.moves_per_temperature = schedule.moves_per_temperature;

  // rows_with[c][r]: rows sharing row r's symbol in column c, r excluded.
  std::vector<std::vector<std::vector<std::size_t>>> rows_with(k, std::vector<std::vector<std::size_t>>(n));
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t o = 0; o < n; ++o) {
        if (o != r && oa(o, c) == oa(r, c)) rows_with[c][r].push_back(o);
      }
    }
  }
  const bool random_column = config.sa.random_column;
  detail::anneal(
      evaluator, budget, budget.limit, schedule, rng,
      [&](std::size_t step) {
        const std::size_t column = random_column ? rng.uniform_below(k) : step % k;
        const auto i = static_cast<std::size_t>(rng.uniform_below(n));
        const auto& peers = rows_with[column][i];
        return detail::Move{column, i, peers[rng.uniform_below(peers.size())]};
      },
      &incumbent, config);
  return detail::finish(incumbent, budget, evaluator.spec(), std::move(config), start);
}

/// SA on w * (mean squared correlation) + (1 - w) * normalized phi_p.
inline SearchResult sa_multiobj_search(std::size_t n, std::size_t k, double w, OptimizerConfig config, int p = 15,
                                       int q = 1) {
  if (!(w >= 0.0 && w <= 1.0)) fail(ErrorCode::invalid_weight, "weight must lie in [0, 1]");
  config.weight = w;
  auto result = sa_search(n, k, CriterionSpec::combo(w, p, q), std::move(config));
  result.config_echo.algorithm = Algorithm::sa_multiobj;
  const auto corr = correlation_summary(result.best);
  result.components["avg_sq_cor"] = corr.avg_sq;
  result.components["max_abs_cor"] = corr.max_abs;
  result.components["phi_p"] = phi_p(result.best, p, q);
  return result;
}

/// Two-stage SA for sliced LHDs.
///
/// Stage 1 anneals each slice's m-run bin design on its own (half of the
/// budget, split evenly). The slices are then assembled by handing the t
/// levels of every bin to the t slices in random order. Stage 2 anneals the
/// full design with swaps between rows whose levels share a bin, which keeps
/// every slice collapsing to an LHD under ceil(x / t).
inline SearchResult sliced_sa_search(const SliceStructure& slices, std::size_t k, const CriterionSpec& spec,
                                     OptimizerConfig config) {
  const auto start = std::chrono::steady_clock::now();
  check_slices(slices);
  const std::size_t n = slices.runs();
  const std::size_t t = slices.t;
  const std::size_t m = slices.m;
  detail::check_search_dimensions(n, k, spec);
  config.check();
  config.slices = slices;
  RngStream rng(config.seed, config.stream_id);
  detail::Budget budget{0, config.max_evaluations};

  // Stage 1.
  CriterionSpec slice_spec = spec;
  slice_spec.phi_upper.reset();
  const std::uint64_t per_slice = (config.max_evaluations / 2) / t;
  std::vector<DesignMatrix> bins;
  for (std::size_t s = 0; s < t; ++s) {
    DesignMatrix slice = random_lhd(m, k, rng);
    if (per_slice > 0) {
      IncrementalEvaluator evaluator(slice, slice_spec);
      ++budget.used;
      const auto schedule = detail::resolve_schedule(config.sa, evaluator.value(), k);
      detail::Incumbent slice_best;
      slice_best.offer(evaluator.design(), evaluator.value(), budget.used);
      detail::anneal(
          evaluator, budget, budget.used - 1 + per_slice, schedule, rng,
          [&](std::size_t step) {
            const auto [i, j] = rng.distinct_pair(m);
            return detail::Move{step % k, i, j};
          },
          &slice_best, OptimizerConfig{});
      slice = slice_best.best();
    }
    bins.push_back(std::move(slice));
  }

  // Assembly.
  IntMatrix cells(n, k);
  std::vector<std::vector<std::size_t>> slice_rows(t);
  for (std::size_t s = 0; s < t; ++s) slice_rows[s] = slices.rows_of(s);
  std::vector<level_t> order(t);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t b = 1; b <= m; ++b) {
      std::iota(order.begin(), order.end(), static_cast<level_t>((b - 1) * t + 1));
      rng.shuffle(std::span<level_t>(order));
      for (std::size_t s = 0; s < t; ++s) {
        for (std::size_t local = 0; local < m; ++local) {
          if (static_cast<std::size_t>(bins[s](local, c)) == b) cells(slice_rows[s][local], c) = order[s];
        }
      }
    }
  }

  // Stage 2.
  detail::Incumbent incumbent;
  auto evaluator = detail::start_evaluator(DesignMatrix::from_cells(std::move(cells)), spec, budget, incumbent, config);
  const auto schedule = detail::resolve_schedule(config.sa, evaluator.value(), k);
  config.sa.t0 = schedule.t0;
  config.sa.moves_per_temperature = schedule.moves_per_temperature;
  std::vector<std::size_t> peers;
  detail::anneal(
      evaluator, budget, budget.limit, schedule, rng,
      [&](std::size_t step) {
        const std::size_t column = step % k;
        const auto i = static_cast<std::size_t>(rng.uniform_below(n));
        const auto& design = evaluator.design();
        const level_t bin = slice_bin(design(i, column), t);
        peers.clear();
        for (std::size_t r = 0; r < n; ++r) {
          if (r != i && slice_bin(design(r, column), t) == bin) peers.push_back(r);
        }
        return detail::Move{column, i, peers[rng.uniform_below(peers.size())]};
      },
      &incumbent, config);
  return detail::finish(incumbent, budget, evaluator.spec(), std::move(config), start);
}

namespace detail {

// Pins U for the weighted objective to phi_p of the first starting design.
inline CriterionSpec pin_upper(CriterionSpec spec, const DesignMatrix& first) {
  if (spec.kind == CriterionKind::weighted_combo && !spec.phi_upper) spec.phi_upper = phi_p(first, spec.p, spec.q);
  return spec;
}

inline void random_swap(std::vector<level_t>& column, RngStream& rng) {
  const auto [i, j] = rng.distinct_pair(column.size());
  std::swap(column[i], column[j]);
}

}  // namespace detail

/// GA whose every offspring is a column-wise cross of the current best with
/// one other member, followed by per-column swap mutation. The best member
/// is carried into the next generation unchanged.
inline SearchResult ga_search(std::size_t n, std::size_t k, const CriterionSpec& spec_in, OptimizerConfig config) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_search_dimensions(n, k, spec_in);
  config.check();
  const double pmut = config.ga.pmut.value_or(1.0 / static_cast<double>(k));
  config.ga.pmut = pmut;
  const std::size_t size = config.ga.population;
  RngStream rng(config.seed, config.stream_id);
  detail::Budget budget{0, config.max_evaluations};
  detail::Incumbent incumbent;

  std::vector<DesignMatrix> population = config.ga.initial_population;
  if (population.empty()) {
    for (std::size_t i = 0; i < size; ++i) population.push_back(random_lhd(n, k, rng));
  } else if (population.size() != size) {
    fail(ErrorCode::invalid_config, "initial population size must equal the population parameter");
  }
  for (const auto& d : population) {
    if (d.runs() != n || d.factors() != k) fail(ErrorCode::invalid_config, "initial population has wrong dimensions");
  }
  const CriterionSpec spec = detail::pin_upper(spec_in, population.front());

  std::vector<double> values;
  for (const auto& d : population) {
    if (budget.spent()) break;
    values.push_back(evaluate(d, spec));
    ++budget.used;
    detail::visit(config, d);
    incumbent.offer(d, values.back(), budget.used);
  }
  population.erase(population.begin() + static_cast<std::ptrdiff_t>(values.size()), population.end());

  std::vector<std::size_t> order;
  std::vector<level_t> column;
  while (!budget.spent()) {
    order.resize(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const DesignMatrix elite = population[order.front()];
    std::vector<DesignMatrix> next{elite};
    std::vector<double> next_values{values[order.front()]};
    for (std::size_t rank = 1; rank < order.size() && !budget.spent(); ++rank) {
      DesignMatrix child = population[order[rank]];
      for (std::size_t c = 0; c < k; ++c) {
        if (rng.bernoulli(0.5)) {
          column = elite.column(c);
          child.assign_column(c, column);
        }
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (rng.bernoulli(pmut)) {
          const auto [i, j] = rng.distinct_pair(n);
          child.swap_in_column(c, i, j);
        }
      }
      const double v = evaluate(child, spec);
      ++budget.used;
      detail::visit(config, child);
      incumbent.offer(child, v, budget.used);
      next.push_back(std::move(child));
      next_values.push_back(v);
    }
    population = std::move(next);
    values = std::move(next_values);
  }
  return detail::finish(incumbent, budget, spec, std::move(config), start);
}

/// Particle swarm over LHDs. Per iteration, per particle, per column: up to
/// same_p swaps toward the personal best, up to same_g toward the global
/// best, then one random swap with probability pmut. Bests are updated after
/// the particle's full move sequence; ties replace the stored best.
inline SearchResult lapso_search(std::size_t n, std::size_t k, const CriterionSpec& spec_in, OptimizerConfig config) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_search_dimensions(n, k, spec_in);
  config.check();
  const std::size_t default_moves = (n + 3) / 4;
  const std::size_t same_p = config.lapso.same_p.value_or(default_moves);
  const std::size_t same_g = config.lapso.same_g.value_or(default_moves);
  const double pmut = config.lapso.pmut.value_or(1.0 / static_cast<double>(k));
  config.lapso.same_p = same_p;
  config.lapso.same_g = same_g;
  config.lapso.pmut = pmut;
  RngStream rng(config.seed, config.stream_id);
  detail::Budget budget{0, config.max_evaluations};
  detail::Incumbent incumbent;

  std::vector<DesignMatrix> particles;
  for (std::size_t i = 0; i < config.lapso.swarm; ++i) particles.push_back(random_lhd(n, k, rng));
  const CriterionSpec spec = detail::pin_upper(spec_in, particles.front());

  std::vector<DesignMatrix> personal;
  std::vector<double> personal_values;
  for (const auto& d : particles) {
    if (budget.spent()) break;
    personal_values.push_back(evaluate(d, spec));
    ++budget.used;
    detail::visit(config, d);
    incumbent.offer(d, personal_values.back(), budget.used);
    personal.push_back(d);
  }
  particles.erase(particles.begin() + static_cast<std::ptrdiff_t>(personal.size()), particles.end());
  std::size_t global = 0;
  for (std::size_t i = 1; i < personal.size(); ++i) {
    if (personal_values[i] < personal_values[global]) global = i;
  }
  DesignMatrix global_best = personal[global];
  double global_value = personal_values[global];

  std::vector<level_t> column, target;
  while (!budget.spent()) {
    for (std::size_t p = 0; p < particles.size() && !budget.spent(); ++p) {
      auto& particle = particles[p];
      for (std::size_t c = 0; c < k; ++c) {
        column = particle.column(c);
        target = personal[p].column(c);
        move_toward(column, target, same_p, rng);
        target = global_best.column(c);
        move_toward(column, target, same_g, rng);
        if (rng.bernoulli(pmut)) detail::random_swap(column, rng);
        particle.assign_column(c, column);
      }
      const double v = evaluate(particle, spec);
      ++budget.used;
      detail::visit(config, particle);
      incumbent.offer(particle, v, budget.used);
      if (v <= personal_values[p]) {
        personal[p] = particle;
        personal_values[p] = v;
      }
      if (v <= global_value) {
        global_best = particle;
        global_value = v;
      }
    }
  }
  return detail::finish(incumbent, budget, spec, std::move(config), start);
}

/// Dispatches on config.algorithm. oasa takes n and k from config.oa and
/// sa-sliced takes n from config.slices; both must agree with the arguments.
inline SearchResult run_search(std::size_t n, std::size_t k, const CriterionSpec& spec, const OptimizerConfig& config) {
  switch (config.algorithm) {
    case Algorithm::sa: return sa_search(n, k, spec, config);
    case Algorithm::oasa:
      if (!config.oa) fail(ErrorCode::invalid_config, "oasa needs an orthogonal array");
      if (config.oa->runs() != n || config.oa->columns() != k) {
        fail(ErrorCode::invalid_config, "n and k must match the orthogonal array");
      }
      return oasa_search(*config.oa, spec, config);
    case Algorithm::sa_multiobj: return sa_multiobj_search(n, k, config.weight, config, spec.p, spec.q);
    case Algorithm::sa_sliced:
      if (!config.slices) fail(ErrorCode::invalid_config, "sa-sliced needs a slice structure");
      if (config.slices->runs() != n) fail(ErrorCode::invalid_config, "n must match the slice structure");
      return sliced_sa_search(*config.slices, k, spec, config);
    case Algorithm::ga: return ga_search(n, k, spec, config);
    case Algorithm::lapso: return lapso_search(n, k, spec, config);
  }
  fail(ErrorCode::invalid_config, "unknown algorithm");
}

}  // namespace lhd
