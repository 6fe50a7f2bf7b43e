// so5lab command line: verification suites, Bethe solutions and spectrum/gauge tables.
//
// Exit status: 0 when every record passes, 1 when any record fails, 2 on errors.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "so5lab/suites.hpp"

using namespace so5lab;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<int> L;
  std::optional<double> tolerance;
  std::optional<long long> seed;
  std::optional<int> samples;
  std::optional<double> h;
  std::string output;
  std::string format;
  std::string drinfeld;
  bool parallel = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value or .json config file")->check(CLI::ExistingFile);
    app->add_option("--L", L, "number of lattice sites");
    app->add_option("--tolerance", tolerance, "threshold for spectral and baseline comparisons");
    app->add_option("--seed", seed, "seed for random angle and coupling samples");
    app->add_option("--samples", samples, "number of random samples");
    app->add_option("--h-scale", h, "level-1 scale h");
    app->add_option("--output", output, "write the result here instead of stdout");
    app->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--drinfeld", drinfeld, "generic Drinfeld relations in the yangian suite")
        ->check(CLI::IsMember({"off", "sample", "exhaustive"}));
    app->add_flag("--parallel", parallel, "run independent checks on all cores");
  }

  /// Config file first, then flags on top.
  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    if (L) cfg.L = *L;
    if (tolerance) cfg.tolerance = *tolerance;
    if (seed) {
      if (*seed < 0) throw InvalidConfig("seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(*seed);
    }
    if (samples) cfg.samples = *samples;
    if (h) cfg.h = *h;
    if (!output.empty()) cfg.output = output;
    if (!format.empty()) cfg.format = parse_format(format);
    if (!drinfeld.empty()) cfg.drinfeld = drinfeld;
    if (parallel) cfg.parallel = true;
    cfg.validate();
    return cfg;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot write output file '" + path + "'");
  out << text;
}

int finish_suite(const SuiteResult& res, const RunConfig& cfg, OutputFormat fallback) {
  const OutputFormat fmt = cfg.format.value_or(fallback);
  if (fmt == OutputFormat::json) {
    emit(report_json(res.report), cfg.output);
  } else {
    emit(to_csv(res.table.empty() ? records_table(res.report) : res.table), cfg.output);
  }
  std::size_t failed = 0;
  for (const auto& r : res.report.records) failed += r.pass ? 0 : 1;
  if (!cfg.output.empty() || fmt == OutputFormat::csv) {
    std::cerr << res.report.suite << ": " << (failed == 0 ? "PASS" : "FAIL") << " (" << res.report.records.size() - failed
              << "/" << res.report.records.size() << " records pass)\n";
  }
  return failed == 0 ? 0 : 1;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (double v : detail::parse_numbers(key, text)) {
    if (v != static_cast<double>(static_cast<int>(v))) throw InvalidConfig(key + " must be integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"so5lab: SO(5) fermion lattice verification"};
  app.require_subcommand(1);

  CommonFlags verify_flags;
  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a named verification suite");
  verify->add_option("suite", suite, "car, zf, so5, yangian, observables, gauge-scan, bethe or spectrum")->required();
  verify_flags.attach(verify);

  auto* bethe = app.add_subcommand("bethe", "Bethe ansatz tools");
  bethe->require_subcommand(1);
  CommonFlags solve_flags;
  std::string occupations;
  std::string quantum_numbers;
  std::string input;
  auto* solve = bethe->add_subcommand("solve", "solve the quantization condition for one state");
  solve->add_option("--occupations", occupations, "n1,n2,n3,n4");
  solve->add_option("--quantum-numbers", quantum_numbers, "one integer per particle, flavor-major");
  solve->add_option("--input", input, "JSON with L, occupations, quantum_numbers and optional theta")
      ->check(CLI::ExistingFile);
  solve_flags.attach(solve);

  auto* spectrum_cmd = app.add_subcommand("spectrum", "spectrum tools");
  spectrum_cmd->require_subcommand(1);
  CommonFlags compare_flags;
  auto* compare = spectrum_cmd->add_subcommand("compare", "Bethe energies against exact diagonalization");
  compare_flags.attach(compare);

  auto* gauge = app.add_subcommand("gauge", "gauge tools");
  gauge->require_subcommand(1);
  CommonFlags scan_flags;
  auto* scan = gauge->add_subcommand("scan", "admissible versus inadmissible angle scan");
  scan_flags.attach(scan);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      const RunConfig cfg = verify_flags.resolve();
      return finish_suite(run_suite_with_table(suite, cfg), cfg, OutputFormat::json);
    }
    if (compare->parsed()) {
      const RunConfig cfg = compare_flags.resolve();
      return finish_suite(run_suite_with_table("spectrum", cfg), cfg, OutputFormat::csv);
    }
    if (scan->parsed()) {
      const RunConfig cfg = scan_flags.resolve();
      return finish_suite(run_suite_with_table("gauge-scan", cfg), cfg, OutputFormat::csv);
    }
    if (solve->parsed()) {
      RunConfig cfg = solve_flags.resolve();
      Occupation occ;
      std::vector<int> l;
      if (!input.empty()) {
        std::ifstream in(input);
        const auto j = nlohmann::json::parse(in);
        if (j.contains("L")) cfg.L = j.at("L").get<int>();
        const auto n = j.at("occupations").get<std::vector<int>>();
        if (n.size() != NUM_FLAVORS) throw InvalidConfig("occupations need four entries");
        std::copy(n.begin(), n.end(), occ.n.begin());
        l = j.at("quantum_numbers").get<std::vector<int>>();
        if (j.contains("theta")) cfg = parse_json_config(nlohmann::json{{"theta", j.at("theta")}}, cfg);
      }
      if (!occupations.empty()) occ = detail::parse_occupation("occupations", occupations);
      if (!quantum_numbers.empty()) l = parse_int_list("quantum-numbers", quantum_numbers);
      if (!cfg.L) throw InvalidConfig("bethe solve needs L (flag, config or input file)");
      cfg.validate();
      const ThetaMatrix theta = detail::model_theta(cfg);
      const BetheState st = solve_bethe(*cfg.L, occ, l, theta, cfg.couplings);
      nlohmann::ordered_json j = st;
      j["quantization_residual"] = quantization_residual(st, theta);
      emit(j.dump(2) + "\n", cfg.output);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
