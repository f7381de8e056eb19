// Acceptance suite. One PASS/FAIL line per criterion.
//
//   lhd_acceptance                 run all criteria
//   lhd_acceptance --criterion N   run criterion N only (exit 1 on FAIL)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "lhd/lhd.hpp"
#include "oracles.hpp"

using namespace lhd;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double oracle_rel_tol = 1e-10;
constexpr double orthogonality_tol = 1e-12;
constexpr std::uint64_t oracle_budget = 20000;
constexpr std::uint64_t maxpro_budget = 50000;
constexpr std::uint64_t nolhd_budget = 50000;
constexpr double nolhd_target = 0.1;
constexpr double nolhd_baseline = 0.3;
constexpr std::uint64_t seeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

OptimizerConfig config_for(Algorithm a, std::uint64_t budget, std::uint64_t seed) {
  OptimizerConfig c;
  c.algorithm = a;
  c.max_evaluations = budget;
  c.seed = seed;
  return c;
}

// 1: sa, ga, lapso reach the enumerated phi_15 optimum on >= 4 of 5 seeds.
Outcome oracle_optimality() {
  Outcome out;
  for (std::size_t n : {4, 5}) {
    const double optimum = oracle::brute_force_phi_optimum(n, 2);
    for (auto a : {Algorithm::sa, Algorithm::ga, Algorithm::lapso}) {
      int hits = 0;
      for (auto seed : seeds) {
        const auto r = run_search(n, 2, CriterionSpec::phi(15, 1), config_for(a, oracle_budget, seed));
        hits += oracle::rel_close(phi_p(r.best, 15, 1), optimum, oracle_rel_tol);
      }
      out.require(hits >= 4, std::string(to_string(a)) + " (" + std::to_string(n) + ",2): " + std::to_string(hits) +
                                 "/5 seeds at optimum " + fmt("%.17g", optimum));
    }
  }
  return out;
}

// 2: constructions are orthogonal, valid, and sized per their formulas.
Outcome construction_orthogonality() {
  Outcome out;
  const auto check = [&](const std::string& label, const std::function<DesignMatrix()>& make, std::size_t n,
                         std::size_t k) {
    try {
      const auto d = make();
      const double cor = max_abs_cor(d);
      const bool ok = validate(d.cells()).ok() && d.runs() == n && d.factors() == k && cor <= orthogonality_tol;
      out.require(ok, label + ": " + std::to_string(d.runs()) + "x" + std::to_string(d.factors()) + " (expected " +
                          std::to_string(n) + "x" + std::to_string(k) + "), maxcor " + fmt("%.3g", cor));
    } catch (const std::exception& e) {
      out.require(false, label + ": " + e.what());
    }
  };
  for (int m = 2; m <= 4; ++m) {
    check("ye1998 m=" + std::to_string(m), [m] { return olhd_ye1998(m); }, (1u << m) + 1, 2 * m - 2);
  }
  for (int m = 2; m <= 4; ++m) {
    // Ye's columns plus C(m-1, 2) extra interaction columns.
    check("cioppa2007 m=" + std::to_string(m), [m] { return olhd_cioppa2007(m); }, (1u << m) + 1,
          m + (m - 1) * (m - 2) / 2);
  }
  for (int c = 1; c <= 2; ++c)
    for (int r = 1; r <= 3; ++r)
      for (bool center : {false, true}) {
        check("sun2010 c=" + std::to_string(c) + " r=" + std::to_string(r) + (center ? " +1" : ""),
              [=] { return olhd_sun2010(c, r, center); }, (static_cast<std::size_t>(r) << (c + 1)) + center,
              1u << c);
      }
  for (int n : {5, 7, 11, 13}) {
    check("butler2001 n=" + std::to_string(n) + " k=" + std::to_string(n - 1),
          [n] { return olhd_butler2001(n, n - 1); }, n, n - 1);
  }
  return out;
}

// 3: every catalog OA survives expand-then-collapse.
Outcome oa_round_trip() {
  Outcome out;
  for (const auto& name : oa_catalog_names()) {
    const auto oa = good_oa_catalog(name);
    bool ok = collapse_to_oa(oa_to_lhd(oa), oa.levels()) == oa.cells();
    RngStream rng(2024, detail::fnv1a64(name));
    int random_ok = 0;
    for (int t = 0; t < 100; ++t) random_ok += collapse_to_oa(oa_to_lhd(oa, rng), oa.levels()) == oa.cells();
    ok = ok && random_ok == 100;
    out.require(ok, name + ": deterministic + " + std::to_string(random_ok) + "/100 random fills collapse back");
  }
  return out;
}

// 4: restricted searches never leave their structure.
Outcome structural_preservation() {
  Outcome out;
  {
    const auto oa = good_oa_catalog("OA(9,4,3,2)");
    auto cfg = config_for(Algorithm::oasa, 1000, 1);
    std::size_t visits = 0, bad = 0;
    cfg.on_visit = [&](const DesignMatrix& d) {
      ++visits;
      bad += collapse_to_oa(d, oa.levels()) != oa.cells();
    };
    oasa_search(oa, CriterionSpec::phi(), cfg);
    out.require(visits == 1000 && bad == 0,
                "oasa OA(9,4,3,2): " + std::to_string(visits) + " visits, " + std::to_string(bad) + " off-structure");
  }
  {
    const auto slices = make_slices(8, 2);
    auto cfg = config_for(Algorithm::sa_sliced, 1000, 1);
    std::size_t visits = 0, bad = 0;
    cfg.on_visit = [&](const DesignMatrix& d) {
      ++visits;
      bad += !is_slice_valid(d, slices);
    };
    // Stage 1 evaluates m-run slice designs; only full designs are visited.
    sliced_sa_search(slices, 3, CriterionSpec::phi(), cfg);
    out.require(visits > 0 && bad == 0,
                "sa-sliced n=8 t=2 k=3: " + std::to_string(visits) + " visits, " + std::to_string(bad) +
                    " slice-invalid");
  }
  return out;
}

// 5: criteria and swap pricing against naive oracles.
Outcome criterion_correctness() {
  Outcome out;
  RngStream rng(5, 5);
  int phi_bad = 0, psi_bad = 0, cor_bad = 0;
  double worst = 0;
  const auto track = [&](double a, double b) {
    const double scale = std::max(std::fabs(a), std::fabs(b));
    if (scale > 0) worst = std::max(worst, std::fabs(a - b) / scale);
  };
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.uniform_below(19);
    const std::size_t k = 1 + rng.uniform_below(8);
    const auto d = random_lhd(n, k, rng);
    for (int q : {1, 2}) {
      const double a = phi_p(d, 15, q), b = oracle::phi_p(d, 15, q);
      track(a, b);
      phi_bad += !oracle::rel_close(a, b, oracle_rel_tol);
    }
    const double a = maxpro_psi(d), b = oracle::maxpro(d);
    track(a, b);
    psi_bad += !oracle::rel_close(a, b, oracle_rel_tol);
    if (k >= 2 && n >= 3) {
      const auto lib = correlation_summary(d);
      const auto ref = oracle::correlations(d);
      const auto close = [](double x, double y) {
        return oracle::rel_close(x, y, oracle_rel_tol) || std::fabs(x - y) <= 1e-15;
      };
      cor_bad += !(close(lib.avg_abs, ref.avg_abs) && close(lib.max_abs, ref.max_abs) && close(lib.avg_sq, ref.avg_sq));
    }
  }
  out.require(phi_bad == 0, "phi_p q=1,2 on 1000 designs: " + std::to_string(phi_bad) + " mismatches");
  out.require(psi_bad == 0, "psi on 1000 designs: " + std::to_string(psi_bad) + " mismatches");
  out.require(cor_bad == 0, "correlations on 1000 designs: " + std::to_string(cor_bad) + " mismatches");

  int delta_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 3 + rng.uniform_below(18);
    const std::size_t k = 2 + rng.uniform_below(7);
    const auto d = random_lhd(n, k, rng);
    const auto c = rng.uniform_below(k);
    const auto [i, j] = rng.distinct_pair(n);
    const auto moved = exchange(d, c, i, j);
    auto combo = CriterionSpec::combo(0.5);
    combo.phi_upper = phi_p(d) * 2;
    for (const auto& spec :
         {CriterionSpec::phi(15, 1), CriterionSpec::phi(15, 2), CriterionSpec::maxpro(), CriterionSpec::avg_cor(),
          CriterionSpec::max_cor(), combo}) {
      const double a = delta_after_exchange(d, spec, c, i, j), b = evaluate(moved, spec);
      track(a, b);
      delta_bad += !(oracle::rel_close(a, b, oracle_rel_tol) || std::fabs(a - b) <= 1e-15);
    }
  }
  out.require(delta_bad == 0, "delta_after_exchange on 1000 moves x 6 criteria: " + std::to_string(delta_bad) +
                                  " mismatches");
  out.notes.push_back("     worst relative deviation " + fmt("%.3g", worst));
  return out;
}

// 6: GA and LaPSO beat random designs on psi.
Outcome maxpro_improvement() {
  Outcome out;
  RngStream rng(6, 0);
  double sum = 0, best = INFINITY;
  for (int t = 0; t < 10000; ++t) {
    const double v = maxpro_psi(random_lhd(10, 3, rng));
    sum += v;
    best = std::min(best, v);
  }
  const double random_mean = sum / 10000;
  out.notes.push_back("     random psi: mean " + fmt("%.6f", random_mean) + ", best " + fmt("%.6f", best));
  for (auto a : {Algorithm::ga, Algorithm::lapso}) {
    double total = 0;
    for (auto seed : seeds) total += run_search(10, 3, CriterionSpec::maxpro(), config_for(a, maxpro_budget, seed)).value;
    const double mean = total / std::size(seeds);
    out.require(mean < random_mean && mean <= best, std::string(to_string(a)) + " mean psi " + fmt("%.6f", mean));
  }
  return out;
}

// 7: weighted SA finds nearly orthogonal 7x3 designs.
Outcome nolhd_identification() {
  Outcome out;
  RngStream rng(7, 0);
  std::vector<double> random_cor;
  for (int t = 0; t < 10000; ++t) random_cor.push_back(max_abs_cor(random_lhd(7, 3, rng)));
  std::nth_element(random_cor.begin(), random_cor.begin() + 5000, random_cor.end());
  const double median = random_cor[5000];
  out.require(median > nolhd_baseline, "random 7x3 median maxcor " + fmt("%.4f", median));
  int hits = 0;
  std::string values;
  for (auto seed : seeds) {
    const auto r = sa_multiobj_search(7, 3, 0.9, config_for(Algorithm::sa_multiobj, nolhd_budget, seed));
    const double cor = max_abs_cor(r.best);
    hits += cor <= nolhd_target;
    values += fmt(" %.4f", cor);
  }
  out.require(hits >= 4, "sa-multiobj w=0.9: " + std::to_string(hits) + "/5 seeds with maxcor <= 0.1 (" +
                             values.substr(1) + ")");
  return out;
}

// 8: the CLI is byte-reproducible and the benchmark ignores concurrency.
int shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string without_timing(const fs::path& meta) {
  auto j = json::parse(read_text_file(meta));
  j.erase("elapsed_ms");
  return j.dump();
}

std::string value_column(const fs::path& csv) {
  std::istringstream in(read_text_file(csv));
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    // every column but elapsed_ms
    fields.pop_back();
    for (const auto& f : fields) out += f + ",";
    out += "\n";
  }
  return out;
}

Outcome determinism() {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() / ("lhd_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = LHD_CLI_PATH;
  struct Command {
    std::string label, args;
    bool trace;
  };
  const std::vector<Command> commands = {
      {"generate random", "generate --random -n 12 -k 4 --seed 42", false},
      {"generate oa random fill", "generate --construction oa --oa 'OA(25,6,5,2)' --fill random --seed 9", false},
      {"search sa", "search -n 10 -k 3 --alg sa --criterion phi_p --budget 5000 --seed 3", true},
      {"search oasa", "search --alg oasa --oa 'OA(9,4,3,2)' --criterion maxpro --budget 2000 --seed 4", true},
      {"search sa-multiobj", "search -n 7 -k 3 --alg sa-multiobj --weight 0.9 --budget 5000 --seed 5", true},
      {"search sa-sliced", "search -n 8 -k 3 --alg sa-sliced --slices 2 --budget 3000 --seed 6", true},
      {"search ga", "search -n 10 -k 3 --alg ga --criterion maxpro --budget 5000 --seed 7", true},
      {"search lapso", "search -n 9 -k 4 --alg lapso --criterion maxcor --budget 5000 --seed 8", true},
  };
  for (const auto& command : commands) {
    const auto run = [&](const std::string& tag) {
      std::string line = cli + " " + command.args + " -o " + (dir / (tag + ".csv")).string();
      if (command.trace) line += " --trace " + (dir / (tag + "_trace.csv")).string();
      return shell(line) == 0;
    };
    if (!run("a") || !run("b")) {
      out.require(false, command.label + ": command failed");
      continue;
    }
    bool same = read_text_file(dir / "a.csv") == read_text_file(dir / "b.csv") &&
                without_timing(dir / "a.json") == without_timing(dir / "b.json");
    if (command.trace) same = same && read_text_file(dir / "a_trace.csv") == read_text_file(dir / "b_trace.csv");
    out.require(same, command.label + ": repeated run byte-identical");
  }
  write_text_file(dir / "spec.json",
                  R"({"grid": [[6, 2], [9, 3]], "algorithms": ["sa", "ga", "lapso", "sa-sliced"],
                      "criterion": "phi_p", "replications": 3, "budget": 4000, "base_seed": 11, "slices": 3})");
  const bool ok1 = shell(cli + " benchmark " + (dir / "spec.json").string() + " --jobs 1 -o " +
                         (dir / "j1.csv").string()) == 0;
  const bool ok4 = shell(cli + " benchmark " + (dir / "spec.json").string() + " --jobs 4 -o " +
                         (dir / "j4.csv").string()) == 0;
  out.require(ok1 && ok4 && value_column(dir / "j1.csv") == value_column(dir / "j4.csv"),
              "benchmark --jobs 1 vs --jobs 4: identical rows apart from timing");
  fs::remove_all(dir);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

const Criterion criteria[] = {
    {1, "oracle optimality", 10, oracle_optimality},
    {2, "exact orthogonality of constructions", 5, construction_orthogonality},
    {3, "OA round-trip", 2, oa_round_trip},
    {4, "structural preservation under restricted search", 5, structural_preservation},
    {5, "criterion correctness", 10, criterion_correctness},
    {6, "MaxPro improvement over random designs", 30, maxpro_improvement},
    {7, "NOLHD identification", 20, nolhd_identification},
    {8, "determinism", 10, determinism},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "-v" || arg == "--verbose") {
      verbose = true;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [-v]\n", argv[0]);
      return 2;
    }
  }
  if (only != 0) verbose = true;
  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.require(seconds < c.limit_seconds, "runtime " + fmt("%.2f", seconds) + " s < " +
                                                   fmt("%.0f", c.limit_seconds) + " s");
    std::printf("%s  %d. %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name, seconds);
    if (verbose || !outcome.pass) {
      for (const auto& note : outcome.notes) std::printf("        %s\n", note.c_str());
    }
    std::fflush(stdout);
    failed += !outcome.pass;
  }
  return failed == 0 ? 0 : 1;
}
