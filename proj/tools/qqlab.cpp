// qqlab: simulation, density, tail and convergence tables for the QuickSelect
// limit law, plus the self-running acceptance suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "qqlab/qqlab.hpp"

namespace {

using json = nlohmann::json;
using namespace qqlab;

struct Result {
  std::string body;
  int exit_status = 0;
  json details = json::object();
};

json sample_summary(const std::vector<double> &draws) {
  const MeanAccumulator acc = summarize(draws);
  json j;
  j["mean"] = acc.mean();
  j["std_err"] = acc.std_err();
  j["variance"] = acc.variance();
  j["min"] = *std::min_element(draws.begin(), draws.end());
  j["max"] = *std::max_element(draws.begin(), draws.end());
  return j;
}

void attach_reference(json &j, double reference) {
  j["reference"] = reference;
  const double se = j["std_err"].get<double>();
  j["z_score"] = se > 0 ? (j["mean"].get<double>() - reference) / se : 0.0;
}

Result run_simulate(const RunConfig &c) {
  const double t = c.t.front();
  json j;
  j["kind"] = c.kind;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  std::vector<double> draws;
  if (c.kind == "quickselect" || c.kind == "grubel") {
    const std::uint64_t n = c.n.front();
    const std::uint64_t m = c.m.value_or(quantile_rank(n, t));
    j["n"] = n;
    j["m"] = m;
    if (c.kind == "quickselect") {
      draws = sample_replicates(
          c.reps, UniformStream(c.seed, streams::kQuickSelect), [&](auto &r) {
            return static_cast<double>(simulate_quickselect(n, m, r).comparisons);
          });
      j.update(sample_summary(draws));
      attach_reference(j, expected_comparisons(n, m));
      if (n <= 2000) {
        j["reference_exact"] = to_string(expected_comparisons_exact(
            static_cast<unsigned>(n), static_cast<unsigned>(m)));
      }
    } else {
      draws = sample_replicates(
          c.reps, UniformStream(c.seed, streams::kGrubel),
          [&](auto &r) { return simulate_grubel_chain(n, m, r); });
      j.update(sample_summary(draws));
      attach_reference(j, expected_comparisons(n, m) / static_cast<double>(n));
    }
  } else if (c.kind == "quickval") {
    const std::uint64_t n = c.n.front();
    j["n"] = n;
    j["t"] = t;
    draws = sample_replicates(
        c.reps, UniformStream(c.seed, streams::kQuickVal), [&](auto &r) {
          return static_cast<double>(simulate_quickval(n, t, r));
        });
    j.update(sample_summary(draws));
    j["scaled_mean"] = j["mean"].get<double>() / static_cast<double>(n);
  } else if (c.kind == "interval") {
    j["t"] = t;
    j["trunc_eps"] = c.trunc_eps;
    draws = sample_replicates(
        c.reps, UniformStream(c.seed, streams::kIntervalPath),
        [&](auto &r) { return 1.0 + sample_j(t, c.trunc_eps, r); });
    j.update(sample_summary(draws));
    attach_reference(j, limit_mean(t));
    j["truncation_bias_bound"] = kTruncationBiasFactor * c.trunc_eps;
  } else {
    j["trunc_eps"] = c.trunc_eps;
    draws = sample_replicates(
        c.reps, UniformStream(c.seed, streams::kPerpetuity),
        [&](auto &r) { return sample_v(c.trunc_eps, r); });
    j.update(sample_summary(draws));
    attach_reference(j, kPerpetuityMean);
  }
  return {dump(j)};
}

Result run_density(const RunConfig &c) {
  const auto xs = uniform_grid(c.x_min, c.x_max, c.points);
  CsvTable csv({"t", "x", "value", "std_err"});
  Result res;
  if (c.what == "grid") {
    const UniformStream base(c.seed, streams::kDensity);
    json support = json::array();
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      const DensityGrid g = estimate_density(c.t[i], xs, c.samples,
                                             c.trunc_eps, base.substream(i));
      for (std::size_t k = 0; k < g.size(); ++k) {
        csv.row(std::vector<double>{g.t, g.xs[k], g.values[k], g.std_errs[k]});
      }
      support.push_back(g.support_max);
    }
    res.details["support_max"] = support;
  } else {
    const double edge = std::min(c.t.front(), 1.0 - c.t.back());
    const double fam_max = std::max(12.0, std::ceil(c.x_max / edge));
    const auto fam_xs = uniform_grid(
        0.0, fam_max, static_cast<std::size_t>(std::llround(fam_max * 40)) + 1);
    const DensityFamily fam =
        DensityFamily::build(c.nodes, fam_xs, c.samples, c.trunc_eps,
                             UniformStream(c.seed, streams::kDensity));
    for (double t : c.t) {
      const auto node = static_cast<std::size_t>(
          std::llround(t * static_cast<double>(c.nodes)));
      for (double x : xs) {
        const Residual r = integral_eq_residual_density(fam, node, x);
        csv.row(std::vector<double>{t, x, r.residual, r.std_err});
      }
    }
    res.details["family_grid_max"] = fam_max;
  }
  res.body = csv.str();
  return res;
}

Result run_dickman(const RunConfig &c) {
  const DickmanTable table(c.x_max, c.step);
  CsvTable csv({"x", "rho", "density", "cdf"});
  for (double x : uniform_grid(c.x_min, c.x_max, c.points)) {
    csv.row(std::vector<double>{x, table.rho(x), table.density(x), table.cdf(x)});
  }
  Result res{csv.str()};
  res.details["richardson_drift_at_x_max"] =
      dickman_richardson_drift(c.x_max, c.step);
  return res;
}

Result run_tails(const RunConfig &c) {
  const MgfTable table = mgf_v_solve(c.theta_max, c.step, c.tol);
  Result res;
  res.details["mgf_iterations"] = table.iterations;
  if (c.what == "mgf") {
    CsvTable csv({"theta", "log_m"});
    for (std::size_t i = 0; i < table.size(); ++i) {
      csv.row(std::vector<double>{table.theta(i), table.log_values[i]});
    }
    res.body = csv.str();
    return res;
  }
  CsvTable csv({"t", "x", "survival_bound", "survival_theta", "density_bound",
                "density_theta", "log_tail_envelope"});
  for (double t : c.t) {
    for (double x : uniform_grid(c.x_min, c.x_max, c.points)) {
      const ChernoffEnvelopes e = chernoff_envelopes(t, x, table);
      const bool has_density = std::isfinite(e.density_bound);
      csv.row(std::vector<std::string>{
          format_double(t), format_double(x), format_double(e.survival_bound),
          format_double(e.survival_theta),
          has_density ? format_double(e.density_bound) : "",
          has_density ? format_double(e.density_theta) : "",
          x > std::numbers::e ? format_double(tail_envelope(x)) : ""});
    }
  }
  res.body = csv.str();
  return res;
}

Result run_series(const RunConfig &c) {
  const SeriesCoeffs s = left_series_coeffs(c.k_max, c.samples, c.trunc_eps,
                                            UniformStream(c.seed, streams::kSeries));
  CsvTable csv({"k", "c", "std_err", "lower", "upper"});
  for (std::size_t i = 0; i < s.ks.size(); ++i) {
    const unsigned k = s.ks[i];
    csv.row(std::vector<double>{static_cast<double>(k), s.c_values[i],
                                s.c_errs[i], series_lower_bound(k),
                                series_upper_bound(k)});
  }
  return {csv.str()};
}

Result run_converge(const RunConfig &c) {
  const double t = c.t.front();
  const UniformStream base(c.seed, streams::kConvergence);
  const EmpiricalSample z = sample_z(t, c.reps, c.trunc_eps, base.substream(0));
  if (!c.ld_x.empty()) {
    const std::uint64_t n = c.n.empty() ? 1000 : c.n.front();
    const EmpiricalSample x = sample_scaled_cost(n, t, c.reps, base.substream(1));
    const LdInterval iv = ld_interval(n, t, c.ld_c, c.ld_omega);
    json j;
    j["t"] = t;
    j["n"] = n;
    j["m_n"] = quantile_rank(n, t);
    j["delta"] = delta_nt(n, t);
    j["interval"] = {{"lower", iv.lower}, {"upper", iv.upper},
                     {"empty", iv.empty()}};
    j["ratios"] = json::array();
    for (double xv : c.ld_x) {
      const LdRatio r = ld_ratio(x, z, xv);
      j["ratios"].push_back({{"x", r.x},
                             {"p_n", r.p_n},
                             {"p_z", r.p_z},
                             {"ratio", r.ratio},
                             {"ratio_se", r.ratio_se},
                             {"in_interval", xv >= iv.lower && xv <= iv.upper}});
    }
    return {dump(j)};
  }
  const std::vector<std::uint64_t> ns =
      c.n.empty() ? std::vector<std::uint64_t>{100, 1000, 10000} : c.n;
  CsvTable csv({"n", "delta", "d1", "d1_se", "d1_exact", "dks", "dks_se",
                "bound"});
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const EmpiricalSample x =
        sample_scaled_cost(ns[i], t, c.reps, base.substream(i + 1));
    const RateRow r = rate_row(ns[i], t, x, z);
    csv.row(std::vector<double>{static_cast<double>(r.n), r.delta, r.d1,
                                r.d1_se, r.d1_exact, r.dks, r.dks_se, r.bound});
  }
  return {csv.str()};
}

Result run_validate(const RunConfig &c) {
  const Suite suite = c.suite == "quick" ? Suite::Quick : Suite::Full;
  const auto progress = [](const CriterionResult &r) {
    std::fprintf(stderr, "criterion %2d %s  %s\n", r.id,
                 r.pass() ? "PASS" : "FAIL", r.title.c_str());
  };
  auto criteria = run_statistical_criteria(c.seed, suite, progress);
  if (suite == Suite::Full) {
    criteria.push_back(determinism_criterion(c.seed));
    progress(criteria.back());
  }
  const auto checks = flatten(criteria);
  const bool ok = std::all_of(checks.begin(), checks.end(),
                              [](const CheckReport &r) { return r.pass; });
  Result res{dump(to_json(checks)), ok ? 0 : 1};
  res.details["checks"] = checks.size();
  res.details["failed"] = std::count_if(
      checks.begin(), checks.end(), [](const CheckReport &r) { return !r.pass; });
  return res;
}

Result run(const RunConfig &c) {
  switch (c.command) {
  case Command::Simulate:
    return run_simulate(c);
  case Command::Density:
    return run_density(c);
  case Command::Dickman:
    return run_dickman(c);
  case Command::Tails:
    return run_tails(c);
  case Command::Series:
    return run_series(c);
  case Command::Converge:
    return run_converge(c);
  case Command::Validate:
    return run_validate(c);
  }
  return {};
}

json manifest(const RunConfig &c, const Result &r, double seconds) {
  json j;
  j["tool"] = "qqlab";
  j["command"] = to_string(c.command);
  j["config"] = to_json(c);
  j["seed"] = c.seed;
  j["workers"] = worker_count();
  j["versions"] = {{"qqlab", std::string(kVersion)},
                   {"compiler", __VERSION__},
                   {"boost", BOOST_LIB_VERSION},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) +
                                         "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                         "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"cli11", CLI11_VERSION}};
  j["exit_status"] = r.exit_status;
  j["details"] = r.details;
  j["wall_time_seconds"] = seconds;
  return j;
}

// Options each command reads; any other option given on the command line is
// rejected. Keys in a config file are not checked, so one file can serve
// several commands.
const std::map<Command, std::set<std::string>> &relevant_options() {
  static const std::map<Command, std::set<std::string>> table{
      {Command::Simulate, {"--n", "--m", "--t", "--reps", "--trunc-eps"}},
      {Command::Density,
       {"--what", "--t", "--samples", "--nodes", "--trunc-eps", "--x-min",
        "--x-max", "--points"}},
      {Command::Dickman, {"--x-min", "--x-max", "--points", "--step"}},
      {Command::Tails,
       {"--what", "--theta-max", "--step", "--tol", "--t", "--x-min",
        "--x-max", "--points"}},
      {Command::Series, {"--k-max", "--samples", "--trunc-eps"}},
      {Command::Converge,
       {"--t", "--n", "--reps", "--trunc-eps", "--ld-x", "--ld-c",
        "--ld-omega"}},
      {Command::Validate, {"--suite"}}};
  return table;
}

const std::set<std::string> kCommandSpecific{
    "--n",     "--m",      "--t",         "--reps",   "--samples", "--nodes",
    "--what",  "--trunc-eps", "--x-min",  "--x-max",  "--points",  "--step",
    "--theta-max", "--tol", "--k-max",    "--ld-x",   "--ld-c",    "--ld-omega",
    "--suite"};

void reject_irrelevant(Command cmd, int argc, char **argv) {
  const auto &allowed = relevant_options().at(cmd);
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    arg = arg.substr(0, arg.find('='));
    if (kCommandSpecific.count(arg) && !allowed.count(arg)) {
      throw std::invalid_argument(arg + " does not apply to '" +
                                  std::string(to_string(cmd)) + "'");
    }
  }
}

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
  } else {
    write_text(path, text);
  }
}

} // namespace

int main(int argc, char **argv) {
  RunConfig cfg;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());

  CLI::App app{"QuickSelect limit-law laboratory", "qqlab"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Read options from a key=value file; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  app.add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out_path, "Output file, '-' for stdout")
      ->capture_default_str();
  app.add_option("--manifest", cfg.manifest_path,
                 "Manifest path (default <out>.manifest.json, stderr for stdout)");

  const std::string g_sample = "Sampling";
  app.add_option("--t", cfg.t, "Quantile or comma-separated list")
      ->delimiter(',')->group(g_sample);
  app.add_option("--n", cfg.n, "Problem size or comma-separated list")
      ->delimiter(',')->group(g_sample);
  app.add_option("--m", cfg.m, "Target rank (default floor(nt)+1)")->group(g_sample);
  app.add_option("--reps", cfg.reps, "Replicates")->capture_default_str()->group(g_sample);
  app.add_option("--samples", cfg.samples, "Monte Carlo samples")
      ->capture_default_str()->group(g_sample);
  app.add_option("--trunc-eps", cfg.trunc_eps, "Interval-width truncation")
      ->capture_default_str()->group(g_sample);

  const std::string g_grid = "Grids";
  app.add_option("--what", cfg.what, "density: grid|residual, tails: mgf|envelope")
      ->group(g_grid);
  app.add_option("--x-min", cfg.x_min)->capture_default_str()->group(g_grid);
  app.add_option("--x-max", cfg.x_max)->capture_default_str()->group(g_grid);
  app.add_option("--points", cfg.points)->capture_default_str()->group(g_grid);
  app.add_option("--nodes", cfg.nodes, "Quantile nodes of the residual family")
      ->capture_default_str()->group(g_grid);
  app.add_option("--step", cfg.step, "Dickman or mgf grid step")
      ->capture_default_str()->group(g_grid);
  app.add_option("--theta-max", cfg.theta_max)->capture_default_str()->group(g_grid);
  app.add_option("--tol", cfg.tol, "mgf fixed-point tolerance")
      ->capture_default_str()->group(g_grid);
  app.add_option("--k-max", cfg.k_max, "Series terms")->capture_default_str()->group(g_grid);

  const std::string g_conv = "Convergence";
  app.add_option("--ld-x", cfg.ld_x, "Thresholds for tail ratios (JSON report)")
      ->delimiter(',')->group(g_conv);
  app.add_option("--ld-c", cfg.ld_c)->capture_default_str()->group(g_conv);
  app.add_option("--ld-omega", cfg.ld_omega)->capture_default_str()->group(g_conv);
  app.add_option("--suite", cfg.suite, "validate: all|quick")
      ->capture_default_str()->group(g_conv);

  auto *sim = app.add_subcommand("simulate", "Replicate one process, JSON summary");
  sim->add_option("kind", cfg.kind, "quickselect|quickval|interval|grubel|v")
      ->required();
  app.add_subcommand("density", "Mixture density grid or residual grid, CSV");
  app.add_subcommand("dickman", "Dickman rho, density and CDF, CSV");
  app.add_subcommand("tails", "mgf table or Chernoff envelopes, CSV");
  app.add_subcommand("series", "Left-tail series coefficients, CSV");
  app.add_subcommand("converge", "Rate table (CSV) or tail-ratio report (JSON)");
  app.add_subcommand("validate", "Acceptance suite, JSON array of checks");
  for (auto *sub : app.get_subcommands({})) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }

  try {
    cfg.command = parse_command(app.get_subcommands().front()->get_name());
    reject_irrelevant(cfg.command, argc, argv);
    if (cfg.what.empty()) {
      cfg.what = cfg.command == Command::Tails ? "mgf" : "grid";
    }
    cfg.validate();
    set_worker_count(cfg.threads);

    const auto start = std::chrono::steady_clock::now();
    const Result result = run(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    emit(cfg.out_path, result.body);
    const std::string man = dump(manifest(cfg, result, seconds));
    const std::string man_path = cfg.resolved_manifest();
    if (man_path.empty()) {
      std::cerr << man;
    } else {
      write_text(man_path, man);
    }
    return result.exit_status;
  } catch (const NumericalGuardError &e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return 3;
  } catch (const ConsistencyError &e) {
    std::cerr << "consistency failure: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error &e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
