// lhd: generate, search, evaluate and benchmark Latin hypercube designs.
//
// Exit codes: 0 ok, 2 usage or input error, 3 internal invariant violation,
// 4 invalid design.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lhd/lhd.hpp"

namespace {

namespace fs = std::filesystem;
using lhd::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_internal = 3;
constexpr int exit_invalid_design = 4;

struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

lhd::OrthogonalArray load_oa(const std::string& name_or_path) {
  for (const auto& name : lhd::oa_catalog_names()) {
    if (name == name_or_path) return lhd::good_oa_catalog(name);
  }
  const fs::path path(name_or_path);
  if (!fs::exists(path)) {
    lhd::fail(lhd::ErrorCode::unknown_name, "'" + name_or_path + "' is neither a catalog OA nor a file");
  }
  // CSV plus sidecar declaring N, K, s, t.
  const auto meta = json::parse(lhd::read_text_file(lhd::sidecar_path(path)));
  auto cells = lhd::read_design_csv(path);
  if (meta.contains("N") && meta.at("N").get<std::size_t>() != cells.rows()) {
    lhd::fail(lhd::ErrorCode::invalid_oa, "sidecar N does not match the file");
  }
  if (meta.contains("K") && meta.at("K").get<std::size_t>() != cells.cols()) {
    lhd::fail(lhd::ErrorCode::invalid_oa, "sidecar K does not match the file");
  }
  return lhd::OrthogonalArray::from_cells(std::move(cells), meta.at("s").get<int>(), meta.value("t", 2));
}

void write_outputs(const lhd::DesignMatrix& design, const json& meta, const std::string& out,
                   const std::string& meta_path) {
  if (!lhd::validate(design.cells()).ok()) throw InternalError("produced design failed validation");
  lhd::write_design_csv(out, design);
  lhd::write_text_file(meta_path.empty() ? lhd::sidecar_path(out) : fs::path(meta_path), meta.dump(2) + "\n");
  std::cout << out << "\n";
}

struct GenerateArgs {
  bool random = false;
  std::string construction;
  std::size_t n = 0, k = 0;
  std::uint64_t seed = 0, stream = 0;
  int m = 0, c = 0, r = 0;
  bool center = false;
  std::string oa, fill = "deterministic", base;
  std::string output = "design.csv", meta;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.random == !a.construction.empty()) {
    lhd::fail(lhd::ErrorCode::invalid_parameter, "choose exactly one of --random or --construction");
  }
  json params;
  std::optional<lhd::DesignMatrix> design;
  std::string generator;
  bool seeded = a.random;
  if (a.random) {
    generator = "random";
    design = lhd::random_lhd(a.n, a.k, a.seed, a.stream);
    params = {{"n", a.n}, {"k", a.k}, {"stream_id", a.stream}};
  } else if (a.construction == "ye1998") {
    design = lhd::olhd_ye1998(a.m);
    params = {{"m", a.m}};
  } else if (a.construction == "cioppa2007") {
    design = lhd::olhd_cioppa2007(a.m);
    params = {{"m", a.m}};
  } else if (a.construction == "sun2010") {
    design = lhd::olhd_sun2010(a.c, a.r, a.center);
    params = {{"c", a.c}, {"r", a.r}, {"center", a.center}};
  } else if (a.construction == "butler2001") {
    design = lhd::olhd_butler2001(static_cast<int>(a.n), static_cast<int>(a.k));
    params = {{"n", a.n}, {"k", a.k}};
  } else if (a.construction == "oa" || a.construction == "tang1993") {
    if (a.oa.empty()) lhd::fail(lhd::ErrorCode::invalid_parameter, "--oa is required");
    const auto oa = load_oa(a.oa);
    if (a.fill == "random") {
      lhd::RngStream rng(a.seed, a.stream);
      design = lhd::oa_to_lhd(oa, rng);
      seeded = true;
    } else if (a.fill == "deterministic") {
      design = lhd::oa_to_lhd(oa);
    } else {
      lhd::fail(lhd::ErrorCode::invalid_parameter, "--fill must be deterministic or random");
    }
    params = {{"oa", a.oa}, {"fill", a.fill}, {"stream_id", a.stream}};
  } else if (a.construction == "lin2009") {
    if (a.oa.empty() || a.base.empty()) lhd::fail(lhd::ErrorCode::invalid_parameter, "--oa and --base are required");
    const auto base = lhd::DesignMatrix::from_cells(lhd::read_design_csv(a.base));
    design = lhd::olhd_lin2009(base, load_oa(a.oa));
    params = {{"oa", a.oa}, {"base", a.base}};
  } else {
    lhd::fail(lhd::ErrorCode::unknown_name, "unknown construction '" + a.construction + "'");
  }
  if (generator.empty()) generator = a.construction;
  json meta{{"n", design->runs()},
            {"k", design->factors()},
            {"generator", generator},
            {"parameters", params},
            {"criteria", lhd::standard_criteria(*design)}};
  if (seeded) meta["seed"] = a.seed;
  write_outputs(*design, meta, a.output, a.meta);
  return exit_ok;
}

struct SearchArgs {
  std::size_t n = 0, k = 0;
  std::string algorithm = "sa", criterion = "phi_p";
  int p = 15, q = 1;
  double weight = 0.5;
  std::uint64_t budget = 10000, seed = 0, stream = 0;
  std::optional<double> t0, pmut;
  double alpha = 0.95;
  std::optional<std::size_t> moves, same_p, same_g;
  bool random_column = false;
  std::size_t population = 20, swarm = 10, slices = 0;
  std::string oa, output = "design.csv", meta, trace, replay;
};

int cmd_search(const SearchArgs& a) {
  std::size_t n = a.n, k = a.k;
  lhd::CriterionSpec spec;
  lhd::OptimizerConfig config;
  if (!a.replay.empty()) {
    const auto meta = json::parse(lhd::read_text_file(a.replay));
    n = meta.at("n").get<std::size_t>();
    k = meta.at("k").get<std::size_t>();
    spec = lhd::criterion_from_json(meta.at("criterion"));
    config = lhd::config_from_json(meta.at("config"));
  } else {
    spec = lhd::CriterionSpec::of(lhd::parse_criterion_kind(a.criterion), a.p, a.q, a.weight);
    config.algorithm = lhd::parse_algorithm(a.algorithm);
    config.max_evaluations = a.budget;
    config.seed = a.seed;
    config.stream_id = a.stream;
    config.sa.t0 = a.t0;
    config.sa.alpha = a.alpha;
    config.sa.moves_per_temperature = a.moves;
    config.sa.random_column = a.random_column;
    config.ga.population = a.population;
    config.ga.pmut = a.pmut;
    config.lapso.swarm = a.swarm;
    config.lapso.same_p = a.same_p;
    config.lapso.same_g = a.same_g;
    config.lapso.pmut = a.pmut;
    config.weight = a.weight;
    if (config.algorithm == lhd::Algorithm::oasa) {
      if (a.oa.empty()) lhd::fail(lhd::ErrorCode::invalid_parameter, "oasa needs --oa");
      config.oa = load_oa(a.oa);
      n = config.oa->runs();
      k = config.oa->columns();
    }
    if (config.algorithm == lhd::Algorithm::sa_sliced) {
      if (a.slices == 0) lhd::fail(lhd::ErrorCode::invalid_parameter, "sa-sliced needs --slices");
      config.slices = lhd::make_slices(n, a.slices);
    }
    if (config.algorithm == lhd::Algorithm::sa_multiobj) {
      spec = lhd::CriterionSpec::combo(a.weight, a.p, a.q);
    }
  }
  const auto result = lhd::run_search(n, k, spec, config);
  if (result.trace.empty() || result.trace.back().best_value != result.value) {
    throw InternalError("trace does not end at the reported value");
  }
  write_outputs(result.best, lhd::search_metadata(result), a.output, a.meta);
  if (!a.trace.empty()) lhd::write_text_file(a.trace, lhd::trace_csv(result.trace));
  return exit_ok;
}

struct EvaluateArgs {
  std::string file;
  std::vector<std::string> criteria;
  int p = 15, q = 1;
  double weight = 0.5;
  std::optional<double> phi_upper;
  std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto cells = lhd::read_design_csv(a.file);
  const auto report = lhd::validate(cells);
  if (!report.ok()) {
    std::cerr << "error: invalid design " << a.file << "\n";
    if (!report.shape_message.empty()) std::cerr << "  " << report.shape_message << "\n";
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      std::cerr << "  column " << c + 1 << ": " << (report.columns[c].ok ? "ok" : report.columns[c].message) << "\n";
    }
    return exit_invalid_design;
  }
  const auto design = lhd::DesignMatrix::from_cells(cells);
  std::vector<std::string> names = a.criteria;
  if (names.empty()) {
    names = {"phi_p", "maxpro"};
    if (design.factors() >= 2) names.insert(names.end(), {"avgcor", "maxcor"});
  }
  json values = json::object();
  for (const auto& name : names) {
    auto spec = lhd::CriterionSpec::of(lhd::parse_criterion_kind(name), a.p, a.q, a.weight);
    if (spec.kind == lhd::CriterionKind::weighted_combo) {
      // U defaults to phi_p of the seeded random design of the same size.
      spec.phi_upper = a.phi_upper ? *a.phi_upper
                                   : lhd::phi_p(lhd::random_lhd(design.runs(), design.factors(), a.seed), a.p, a.q);
      values["combo_phi_upper"] = *spec.phi_upper;
    }
    values[name] = lhd::evaluate(design, spec);
  }
  json out{{"file", a.file}, {"n", design.runs()}, {"k", design.factors()}, {"valid", true}, {"criteria", values}};
  std::cout << out.dump(2) << "\n";
  return exit_ok;
}

struct BenchmarkArgs {
  std::string spec_file, output = "benchmark.csv", summary;
  unsigned jobs = 1;
};

int cmd_benchmark(const BenchmarkArgs& a) {
  json j;
  try {
    j = json::parse(lhd::read_text_file(a.spec_file));
  } catch (const json::exception& e) {
    lhd::fail(lhd::ErrorCode::invalid_config, std::string("malformed benchmark spec: ") + e.what());
  }
  const auto spec = lhd::benchmark_spec_from_json(j);
  const auto rows = lhd::run_benchmark(spec, a.jobs == 0 ? std::thread::hardware_concurrency() : a.jobs);
  const auto summary = lhd::summarize(rows);
  lhd::write_text_file(a.output, lhd::benchmark_csv(rows));
  if (!a.summary.empty()) lhd::write_text_file(a.summary, lhd::summary_csv(summary));
  std::cout << lhd::summary_table(summary);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latin hypercube design generator, optimizer and evaluator"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a random or constructed design");
  generate->add_flag("--random", gen.random, "Random LHD from -n, -k, --seed");
  generate->add_option("--construction", gen.construction,
                       "ye1998 | cioppa2007 | sun2010 | butler2001 | oa | lin2009");
  generate->add_option("-n,--n", gen.n, "Runs");
  generate->add_option("-k,--k", gen.k, "Factors");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--stream", gen.stream, "Stream id");
  generate->add_option("--m", gen.m, "Order for ye1998 / cioppa2007");
  generate->add_option("--c", gen.c, "sun2010 c");
  generate->add_option("--r", gen.r, "sun2010 r");
  generate->add_flag("--center", gen.center, "sun2010: add the center run");
  generate->add_option("--oa", gen.oa, "Catalog name or CSV path of an orthogonal array");
  generate->add_option("--fill", gen.fill, "oa fill: deterministic | random");
  generate->add_option("--base", gen.base, "lin2009 base design CSV");
  generate->add_option("-o,--output", gen.output);
  generate->add_option("--meta", gen.meta, "Metadata path (default: output with .json)");

  SearchArgs sr;
  auto* search = app.add_subcommand("search", "Optimize a design with a metaheuristic");
  search->add_option("-n,--n", sr.n);
  search->add_option("-k,--k", sr.k);
  search->add_option("--alg", sr.algorithm, "sa | oasa | sa-multiobj | sa-sliced | ga | lapso");
  search->add_option("--criterion", sr.criterion, "phi_p | maxpro | avgcor | maxcor | combo");
  search->add_option("-p,--p", sr.p, "phi_p exponent");
  search->add_option("--q", sr.q, "Distance exponent (1 or 2)");
  search->add_option("--weight", sr.weight, "Correlation weight for combo / sa-multiobj");
  search->add_option("--budget", sr.budget, "Criterion evaluations");
  search->add_option("--seed", sr.seed);
  search->add_option("--stream", sr.stream);
  search->add_option("--t0", sr.t0);
  search->add_option("--alpha", sr.alpha);
  search->add_option("--moves", sr.moves, "SA moves per temperature");
  search->add_flag("--random-column", sr.random_column);
  search->add_option("--pop", sr.population);
  search->add_option("--pmut", sr.pmut);
  search->add_option("--swarm", sr.swarm);
  search->add_option("--same-p", sr.same_p);
  search->add_option("--same-g", sr.same_g);
  search->add_option("--slices", sr.slices, "Slice count t for sa-sliced");
  search->add_option("--oa", sr.oa, "Orthogonal array for oasa");
  search->add_option("-o,--output", sr.output);
  search->add_option("--meta", sr.meta);
  search->add_option("--trace", sr.trace, "Trace CSV path");
  search->add_option("--replay", sr.replay, "Rerun the configuration stored in a metadata file");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Validate a design and print criterion values");
  evaluate->add_option("file", ev.file)->required();
  evaluate->add_option("--criteria", ev.criteria, "Subset of phi_p,maxpro,avgcor,maxcor,combo")->delimiter(',');
  evaluate->add_option("-p,--p", ev.p);
  evaluate->add_option("--q", ev.q);
  evaluate->add_option("--weight", ev.weight);
  evaluate->add_option("--phi-upper", ev.phi_upper, "U for combo");
  evaluate->add_option("--seed", ev.seed, "Seed of the random design that sets U when --phi-upper is absent");

  BenchmarkArgs bm;
  auto* benchmark = app.add_subcommand("benchmark", "Run a benchmark grid from a JSON spec");
  benchmark->add_option("spec", bm.spec_file)->required();
  benchmark->add_option("-o,--output", bm.output);
  benchmark->add_option("--summary", bm.summary);
  benchmark->add_option("--jobs", bm.jobs, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*search) return cmd_search(sr);
    if (*evaluate) return cmd_evaluate(ev);
    if (*benchmark) return cmd_benchmark(bm);
  } catch (const lhd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == lhd::ErrorCode::invalid_design ? exit_invalid_design : exit_usage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_usage;
}
