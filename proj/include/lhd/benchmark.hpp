#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lhd/constructions.hpp"
#include "lhd/io.hpp"
#include "lhd/search.hpp"

namespace lhd {

/// Grid of (n, k) cells x algorithms x replications under one criterion.
///
/// JSON form:
///   {"grid": [[4, 2], [5, 2]], "algorithms": ["sa", "ga", "lapso"],
///    "criterion": "phi_p" | {"kind": ..., "p": ..., "q": ..., "weight": ...},
///    "replications": 5, "budget": 20000, "base_seed": 1,
///    "params": {<optimizer config fields>}, "slices": 2, "oa": "OA(9,4,3,2)"}
/// "reps" is accepted for "replications". "slices" (t) is needed by
/// sa-sliced and "oa" (catalog name) by oasa.
struct BenchmarkSpec {
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  std::vector<Algorithm> algorithms;
  CriterionSpec criterion;
  std::size_t replications = 1;
  std::uint64_t budget = 10000;
  std::uint64_t base_seed = 0;
  OptimizerConfig params;
  std::optional<std::size_t> slice_count;
  std::optional<std::string> oa_name;
};

inline BenchmarkSpec benchmark_spec_from_json(const json& j) {
  try {
    BenchmarkSpec spec;
    for (const auto& cell : j.at("grid")) {
      const auto nk = cell.get<std::vector<std::size_t>>();
      if (nk.size() != 2) fail(ErrorCode::invalid_config, "grid cells must be [n, k] pairs");
      check_dimensions(nk[0], nk[1]);
      spec.grid.emplace_back(nk[0], nk[1]);
    }
    for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    spec.criterion = criterion_from_json(j.at("criterion"));
    spec.replications = j.contains("replications") ? j.at("replications").get<std::size_t>()
                                                   : j.value("reps", std::size_t{1});
    spec.budget = j.at("budget").get<std::uint64_t>();
    spec.base_seed = j.value("base_seed", std::uint64_t{0});
    if (j.contains("params")) spec.params = config_from_json(j.at("params"));
    if (j.contains("slices")) spec.slice_count = j.at("slices").get<std::size_t>();
    if (j.contains("oa")) spec.oa_name = j.at("oa").get<std::string>();
    if (spec.grid.empty() || spec.algorithms.empty()) fail(ErrorCode::invalid_config, "empty grid or algorithm list");
    if (spec.replications < 1) fail(ErrorCode::invalid_config, "replications must be >= 1");
    if (spec.budget == 0) fail(ErrorCode::invalid_config, "budget must be positive");
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("malformed benchmark spec: ") + e.what());
  }
}

/// stream-id of replication `rep` in cell (algorithm, n, k).
inline std::uint64_t benchmark_stream_id(Algorithm a, std::size_t n, std::size_t k, std::size_t rep) {
  const std::string key = std::string(to_string(a)) + "|" + std::to_string(n) + "|" + std::to_string(k) + "|" +
                          std::to_string(rep);
  return detail::fnv1a64(key);
}

struct BenchmarkRow {
  Algorithm algorithm;
  std::size_t n, k;
  std::string criterion;
  std::size_t rep;
  std::uint64_t seed;
  double value;
  std::uint64_t evaluations;
  double elapsed_ms;
};

struct BenchmarkSummary {
  Algorithm algorithm;
  std::size_t n, k;
  double mean, sd, best;
};

/// Runs every (cell, algorithm, replication) on up to `jobs` threads. Rows
/// come back in canonical order: grid cell, then algorithm, then rep.
inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec& spec, unsigned jobs = 1) {
  struct Job {
    Algorithm algorithm;
    std::size_t n, k, rep;
  };
  std::vector<Job> work;
  for (const auto& [n, k] : spec.grid) {
    for (auto a : spec.algorithms) {
      for (std::size_t rep = 0; rep < spec.replications; ++rep) work.push_back({a, n, k, rep});
    }
  }
  std::optional<OrthogonalArray> oa;
  if (spec.oa_name) oa = good_oa_catalog(*spec.oa_name);

  std::vector<std::optional<BenchmarkRow>> rows(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= work.size()) return;
      const Job& job = work[index];
      try {
        OptimizerConfig config = spec.params;
        config.algorithm = job.algorithm;
        config.max_evaluations = spec.budget;
        config.seed = spec.base_seed;
        config.stream_id = benchmark_stream_id(job.algorithm, job.n, job.k, job.rep);
        if (job.algorithm == Algorithm::sa_sliced) {
          if (!spec.slice_count) fail(ErrorCode::invalid_config, "sa-sliced needs \"slices\"");
          config.slices = make_slices(job.n, *spec.slice_count);
        }
        if (job.algorithm == Algorithm::oasa) {
          if (!oa) fail(ErrorCode::invalid_config, "oasa needs \"oa\"");
          config.oa = oa;
        }
        const auto result = run_search(job.n, job.k, spec.criterion, config);
        rows[index] = BenchmarkRow{job.algorithm, job.n,        job.k,           spec.criterion.name(),
                                   job.rep,       spec.base_seed, result.value, result.evaluations_used,
                                   result.elapsed.count()};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(work.size());
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  std::vector<BenchmarkRow> out;
  for (auto& r : rows) out.push_back(*r);
  return out;
}

inline std::vector<BenchmarkSummary> summarize(const std::vector<BenchmarkRow>& rows) {
  std::vector<BenchmarkSummary> out;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double sum = 0.0;
    double best = rows[i].value;
    while (j < rows.size() && rows[j].algorithm == rows[i].algorithm && rows[j].n == rows[i].n &&
           rows[j].k == rows[i].k) {
      sum += rows[j].value;
      best = std::min(best, rows[j].value);
      ++j;
    }
    const double count = static_cast<double>(j - i);
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t r = i; r < j; ++r) ss += (rows[r].value - mean) * (rows[r].value - mean);
    const double sd = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
    out.push_back({rows[i].algorithm, rows[i].n, rows[i].k, mean, sd, best});
    i = j;
  }
  return out;
}

inline std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "algorithm,n,k,criterion,rep,seed,value,evaluations,elapsed_ms\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.algorithm)) + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
           r.criterion + "," + std::to_string(r.rep) + "," + std::to_string(r.seed) + "," + format_double(r.value) +
           "," + std::to_string(r.evaluations) + "," + format_double(r.elapsed_ms) + "\n";
  }
  return out;
}

inline std::string summary_csv(const std::vector<BenchmarkSummary>& summary) {
  std::string out = "algorithm,n,k,mean,sd,best\n";
  for (const auto& s : summary) {
    out += std::string(to_string(s.algorithm)) + "," + std::to_string(s.n) + "," + std::to_string(s.k) + "," +
           format_double(s.mean) + "," + format_double(s.sd) + "," + format_double(s.best) + "\n";
  }
  return out;
}

inline std::string summary_table(const std::vector<BenchmarkSummary>& summary) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %5s %4s %14s %14s %14s\n", "algorithm", "n", "k", "mean", "sd", "best");
  out += line;
  for (const auto& s : summary) {
    std::snprintf(line, sizeof line, "%-12s %5zu %4zu %14.8g %14.8g %14.8g\n", std::string(to_string(s.algorithm)).c_str(),
                  s.n, s.k, s.mean, s.sd, s.best);
    out += line;
  }
  return out;
}

}  // namespace lhd
