#include "fica/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fica/errors.hpp"
#include "fica/kernels.hpp"
#include "fica/montecarlo.hpp"
#include "fica/rng.hpp"
#include "fica/serialize.hpp"

namespace fica {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Flags shared by the model-driven subcommands. A config file or a preset
// supplies the model; individual flags override single fields afterwards.
struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string algo;
  int scenario = 0;
  std::string nl;
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  int trials = 0;
  int threads = 0;
  std::string kernel;
  std::string init;
  std::string out_dir;
};

void add_common(CLI::App* sub, CommonOpts& o, bool with_experiment_knobs) {
  sub->add_option("--config", o.config_path, "experiment config JSON file");
  sub->add_option("--preset", o.preset, "built-in config: paper-example | desk");
  sub->add_option("--algo", o.algo, "algorithm: dfl | sym")
      ->check(CLI::IsMember({"dfl", "sym"}));
  sub->add_option("--scenario", o.scenario, "standardization scenario 1..4")
      ->check(CLI::Range(1, 4));
  sub->add_option("--nl", o.nl, "nonlinearity: pow3 | tanh | gauss")
      ->check(CLI::IsMember({"pow3", "tanh", "gauss"}));
  sub->add_option("--out", o.out_dir, "output directory (default: print to stdout)");
  if (with_experiment_knobs) {
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--n", o.n, "samples per trial");
    sub->add_option("--trials", o.trials, "number of trials");
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--kernel", o.kernel, "compute kernel: auto | scalar | avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
    sub->add_option("--init", o.init,
                    "iteration start: random | truth (separator-adjacent fixed point)")
        ->check(CLI::IsMember({"random", "truth"}));
  }
}

// count() throws for options a subcommand never registered; this does not.
bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt && opt->count() > 0;
}

ExperimentConfig resolve_config(const CLI::App* sub, const CommonOpts& o) {
  const bool have_file = given(sub, "--config");
  const bool have_preset = given(sub, "--preset");
  if (have_file && have_preset)
    throw ValidationError("--config and --preset are mutually exclusive");
  if (!have_file && !have_preset)
    throw ValidationError("a model is required: pass --config FILE or --preset NAME");

  ExperimentConfig cfg =
      have_preset ? preset_config(o.preset) : config_from_json_text(read_file(o.config_path));

  if (given(sub, "--algo")) cfg.algorithm = o.algo == "dfl" ? Algorithm::dfl : Algorithm::sym;
  if (given(sub, "--scenario")) cfg.scenario = scenario_from_int(o.scenario);
  if (given(sub, "--nl")) cfg.nonlinearity = o.nl;
  if (given(sub, "--seed")) cfg.master_seed = o.seed;
  if (given(sub, "--n")) cfg.n = o.n;
  if (given(sub, "--trials")) cfg.trials = o.trials;
  if (given(sub, "--threads")) cfg.threads = o.threads;
  if (given(sub, "--kernel")) cfg.kernel = o.kernel;
  if (given(sub, "--init")) cfg.init = o.init;
  return cfg;
}

// Writes the artifacts plus a manifest naming them; the timestamp is opt-in
// so that reruns stay byte-identical by default.
void emit(const fs::path& dir, const std::string& cfg_hash,
          const std::vector<std::pair<std::string, std::string>>& files, bool stamp) {
  fs::create_directories(dir);
  std::vector<std::string> names;
  for (const auto& [name, content] : files) {
    write_file(dir / name, content);
    names.push_back(name);
  }
  names.push_back("manifest.json");
  write_file(dir / "manifest.json",
             manifest_to_json_text(cfg_hash, names, stamp ? utc_timestamp() : ""));
}

std::vector<int> parse_order(const std::string& text) {
  std::vector<int> order;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ','))
    try {
      order.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ValidationError("--order must be a comma-separated list of source indices");
    }
  return order;
}

int cmd_moments(const CLI::App* sub, const CommonOpts& o, bool stamp) {
  const ExperimentConfig cfg = resolve_config(sub, o);
  const auto& nl = builtin_nonlinearity(cfg.nonlinearity);
  std::vector<MomentRow> rows;
  for (std::size_t s = 0; s < cfg.model.sources.size(); ++s)
    rows.push_back({static_cast<int>(s), cfg.nonlinearity,
                    compute_moments(cfg.model.sources[s], nl, cfg.moment_options)});
  if (given(sub, "--out")) {
    emit(o.out_dir, config_hash(cfg),
         {{"moments.json", moments_to_json_text(rows)}, {"moments.csv", moments_to_csv(rows)}},
         stamp);
  } else {
    std::cout << moments_to_json_text(rows);
  }
  return 0;
}

int cmd_predict(const CLI::App* sub, const CommonOpts& o, const std::string& order_text,
                bool stamp) {
  const ExperimentConfig cfg = resolve_config(sub, o);
  const auto& nl = builtin_nonlinearity(cfg.nonlinearity);
  TheoryInput in = make_theory_input(cfg.model, nl, cfg.moment_options);
  if (!order_text.empty()) {
    if (cfg.algorithm != Algorithm::dfl)
      throw ValidationError("--order applies to the deflationary algorithm only");
    in.extraction_order = parse_order(order_text);
  }

  std::vector<VarianceTable> tables;
  if (given(sub, "--scenario")) {
    tables.push_back(variance_table(cfg.algorithm, cfg.scenario, in));
  } else {
    for (int k = 1; k <= 4; ++k)
      tables.push_back(variance_table(cfg.algorithm, scenario_from_int(k), in));
  }

  if (given(sub, "--out")) {
    emit(o.out_dir, config_hash(cfg),
         {{"tables.json", tables_to_json_text(tables, in.moments)},
          {"tables.csv", tables_to_csv(tables)}},
         stamp);
  } else {
    std::cout << tables_to_json_text(tables, in.moments);
  }
  return 0;
}

int cmd_simulate(const CLI::App* sub, const CommonOpts& o, const std::string& dump_data,
                 bool progress, bool stamp) {
  ExperimentConfig cfg = resolve_config(sub, o);
  cfg.progress = progress;

  if (!dump_data.empty()) {
    const DataMatrix y = generate_observations(cfg.model, cfg.n, rng::derive(cfg.master_seed, 0));
    write_file(dump_data, observations_to_csv(y));
  }

  const TrialReport report = run_experiment(cfg);
  const std::string hash = config_hash(cfg);
  const std::string hist_csv = histograms_to_csv(report);

  std::fprintf(stderr, "included %d/%d trials (exclusion rate %.4f)\n", report.included,
               report.trials, report.exclusion_rate);
  for (const auto& e : report.entries)
    std::fprintf(stderr, "entry (%d,%d): var_emp %.6f  v_pred %.6f  rel_err %+.4f\n", e.i, e.j,
                 e.var_emp, e.v_pred, e.rel_err);
  if (!report.adjudication_winner.empty())
    std::fprintf(stderr, "scenario-1 coefficient reading supported by the data: %s\n",
                 report.adjudication_winner.c_str());

  const fs::path dir = given(sub, "--out") ? fs::path(o.out_dir) : fs::path("fica-out");
  emit(dir, hash,
       {{"config.json", config_to_json_text(cfg)},
        {"report.json", report_to_json_text(report, hash)},
        {"histograms.csv", hist_csv},
        {"histograms.gp", gnuplot_script(report, "histograms.csv")}},
       stamp);
  std::cout << (dir / "report.json").string() << "\n";
  return 0;
}

int cmd_verify(const CLI::App* sub, const CommonOpts& o, const std::string& report_path,
               double tol, bool stamp) {
  const ExperimentConfig cfg = resolve_config(sub, o);
  const fs::path dir = given(sub, "--out") ? fs::path(o.out_dir) : fs::path("fica-out");
  const std::string path =
      given(sub, "--report") ? report_path : (dir / "report.json").string();
  const TrialReport report = report_from_json_text(read_file(path));

  const std::string hash = config_hash(cfg);
  const TheoryBundle theory = make_theory_bundle(cfg, report);
  const Verdict verdict = compare(report, theory, tol);

  for (const auto& e : verdict.entries) {
    if (!e.gated && e.rule == "ungated-small-bin") continue;
    std::fprintf(stderr, "entry (%d,%d) %s: var_emp %.6f  v_pred %.6f  %s\n", e.i, e.j,
                 e.rule.c_str(), e.var_emp, e.v_pred, e.pass ? "ok" : "OUTSIDE TOLERANCE");
  }
  std::fprintf(stderr, "verdict: %s (tolerance %.2f)\n", verdict.pass ? "PASS" : "FAIL", tol);

  emit(dir, hash,
       {{"theory.json", theory_to_json_text(theory, hash)},
        {"verdict.json", verdict_to_json_text(verdict)}},
       stamp);
  return verdict.pass ? 0 : 2;
}

int cmd_separate(const std::string& data_path, const std::string& truth_path, int scenario,
                 const std::string& algo, const std::string& nl_name, std::uint64_t seed,
                 const std::string& kernel, const std::string& out_dir) {
  if (!kernels::select(kernel))
    throw ValidationError("kernel '" + kernel + "' not available here");
  const DataMatrix y = observations_from_csv(read_file(data_path));
  const Scenario sc = scenario_from_int(scenario);

  std::optional<Truth> truth;
  if (!truth_path.empty()) truth = truth_from_json_text(read_file(truth_path));
  const StandardizedData std_data = preprocess(y, sc, truth);

  const auto& nl = builtin_nonlinearity(nl_name);
  const int d = static_cast<int>(y.rows());
  const Matrix w0 = random_orthonormal(d, seed);
  const UnmixResult res = algo == "dfl" ? deflationary(std_data.x, nl, w0)
                                        : symmetric(std_data.x, nl, w0);
  if (!res.all_converged())
    throw ExperimentError("separation did not converge within the sweep budget");

  // Rows of M = W^T C^{-1/2} recover the sources from centered observations.
  const Matrix m = res.w.transpose() * std_data.sphering;
  const DataMatrix shat = m * (y.colwise() - std_data.center_used);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "unmixing.csv", matrix_to_csv(m, "m"));
    write_file(fs::path(out_dir) / "sources.csv", observations_to_csv(shat));
    std::cout << (fs::path(out_dir) / "sources.csv").string() << "\n";
  } else {
    std::cout << matrix_to_csv(m, "m");
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"FastICA asymptotic-variance toolkit"};
  app.require_subcommand(1);
  bool stamp = false;
  app.add_flag("--stamp", stamp, "record a wall-clock timestamp in the manifest");

  CommonOpts mo, po, so, vo;
  std::string order_text, dump_data, report_path;
  bool progress = false;
  double tol = 0.15;

  auto* moments = app.add_subcommand("moments", "per-source contrast expectations");
  add_common(moments, mo, false);

  auto* predict = app.add_subcommand("predict", "closed-form variance tables");
  add_common(predict, po, false);
  predict->add_option("--order", order_text,
                      "deflationary extraction order, e.g. 0,2,1 (default identity)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment");
  add_common(simulate, so, true);
  simulate->add_option("--dump-data", dump_data, "also write trial-0 observations to this CSV");
  simulate->add_flag("--progress", progress, "progress lines on stderr");

  auto* verify = app.add_subcommand("verify", "compare a report against the predictions");
  add_common(verify, vo, false);
  verify->add_option("--report", report_path, "report JSON (default: <out>/report.json)");
  verify->add_option("--tol", tol, "relative tolerance for gated entries");

  auto* separate = app.add_subcommand("separate", "unmix a CSV of observations");
  std::string data_path, truth_path, sep_algo = "sym", sep_nl = "tanh", sep_kernel = "auto";
  std::string sep_out;
  int sep_scenario = 4;
  std::uint64_t sep_seed = 1;
  separate->add_option("--data", data_path, "observations CSV (header y1..yd)")->required();
  separate->add_option("--truth", truth_path, "population mean/cov JSON (scenarios 1-3)");
  separate->add_option("--scenario", sep_scenario, "standardization scenario 1..4")
      ->check(CLI::Range(1, 4));
  separate->add_option("--algo", sep_algo, "dfl | sym")->check(CLI::IsMember({"dfl", "sym"}));
  separate->add_option("--nl", sep_nl, "pow3 | tanh | gauss")
      ->check(CLI::IsMember({"pow3", "tanh", "gauss"}));
  separate->add_option("--seed", sep_seed, "init seed");
  separate->add_option("--kernel", sep_kernel, "auto | scalar | avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  separate->add_option("--out", sep_out, "output directory (default: print unmixing matrix)");

  try {
    app.parse(argc, argv);
    if (moments->parsed()) return cmd_moments(moments, mo, stamp);
    if (predict->parsed()) return cmd_predict(predict, po, order_text, stamp);
    if (simulate->parsed()) return cmd_simulate(simulate, so, dump_data, progress, stamp);
    if (verify->parsed()) return cmd_verify(verify, vo, report_path, tol, stamp);
    if (separate->parsed())
      return cmd_separate(data_path, truth_path, sep_scenario, sep_algo, sep_nl, sep_seed,
                          sep_kernel, sep_out);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace fica
