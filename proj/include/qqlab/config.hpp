#ifndef QQLAB_CONFIG_HPP_
#define QQLAB_CONFIG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qqlab/key_process.hpp"

namespace qqlab {

enum class Command { Simulate, Density, Dickman, Tails, Series, Converge, Validate };

inline constexpr std::string_view kCommandNames[] = {
    "simulate", "density", "dickman", "tails", "series", "converge", "validate"};

inline std::string_view to_string(Command c) {
  return kCommandNames[static_cast<int>(c)];
}

inline Command parse_command(std::string_view s) {
  for (int i = 0; i < 7; ++i) {
    if (kCommandNames[i] == s) {
      return static_cast<Command>(i);
    }
  }
  throw std::invalid_argument("unknown command '" + std::string(s) + "'");
}

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Everything one CLI run depends on. Fields a command does not read keep
/// their defaults and are still echoed in the manifest.
struct RunConfig {
  Command command = Command::Validate;
  std::string kind;              // simulate: quickselect|quickval|interval|grubel|v
  std::string what;              // density: grid|residual; tails: mgf|envelope
  std::vector<double> t{0.5};
  std::vector<std::uint64_t> n;
  std::optional<std::uint64_t> m;
  std::uint64_t reps = 100'000;
  std::uint64_t samples = 100'000;
  std::uint64_t nodes = 20;
  double trunc_eps = kDefaultTruncEps;
  double x_min = 0.0;
  double x_max = 6.0;
  std::uint64_t points = 241;
  double step = 1e-3;
  double theta_max = 8.0;
  double tol = 1e-12;
  unsigned k_max = 10;
  std::vector<double> ld_x;
  double ld_c = 1.5;
  double ld_omega = 1.0;
  std::string suite = "all";
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  std::string out_path = "-";
  std::string manifest_path;

  bool to_stdout() const { return out_path.empty() || out_path == "-"; }

  /// Manifest path: explicit, else next to the output; empty means stderr.
  std::string resolved_manifest() const {
    if (!manifest_path.empty()) {
      return manifest_path;
    }
    return to_stdout() ? std::string() : out_path + ".manifest.json";
  }

  void validate() const;
};

namespace detail {

inline void require(bool ok, const std::string &msg) {
  if (!ok) {
    throw std::invalid_argument(msg);
  }
}

inline void require_positive(std::uint64_t v, const char *name) {
  require(v > 0, std::string(name) + " must be positive");
}

inline void require_grid(double lo, double hi, std::uint64_t points) {
  require(lo < hi, "x-min must be below x-max");
  require(points >= 2, "points must be at least 2");
}

inline void require_one(const std::vector<double> &t) {
  require(t.size() == 1, "this command takes a single --t");
}

} // namespace detail

inline void RunConfig::validate() const {
  using detail::require;
  require(!t.empty(), "--t needs at least one quantile");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t[i] >= 0.0 && t[i] <= 1.0, "quantile t must lie in [0,1]");
    require(i == 0 || t[i] > t[i - 1], "t-list must be strictly increasing");
  }
  for (std::size_t i = 1; i < n.size(); ++i) {
    require(n[i] > n[i - 1], "n-list must be strictly increasing");
  }
  for (std::uint64_t v : n) {
    detail::require_positive(v, "n");
  }
  require(trunc_eps > 0.0, "trunc-eps must be positive");
  require(threads >= 1, "threads must be at least 1");

  switch (command) {
  case Command::Simulate: {
    static const std::vector<std::string> kinds{"quickselect", "quickval",
                                                "interval", "grubel", "v"};
    require(std::find(kinds.begin(), kinds.end(), kind) != kinds.end(),
            "simulate kind must be one of quickselect, quickval, interval, "
            "grubel, v");
    detail::require_positive(reps, "reps");
    detail::require_one(t);
    if (kind == "quickselect" || kind == "quickval" || kind == "grubel") {
      require(n.size() == 1, kind + " needs a single --n");
    }
    if (m) {
      require(kind == "quickselect" || kind == "grubel",
              "--m applies to quickselect and grubel only");
      require(*m >= 1 && *m <= n.front(), "m must satisfy 1 <= m <= n");
    }
    break;
  }
  case Command::Density:
    require(what == "grid" || what == "residual",
            "density --what must be grid or residual");
    detail::require_positive(samples, "samples");
    detail::require_grid(x_min, x_max, points);
    for (double v : t) {
      require(v > 0.0 && v < 1.0,
              "density needs 0 < t < 1 (the endpoint laws come from "
              "'dickman')");
    }
    if (what == "residual") {
      require(nodes >= 2, "nodes must be at least 2");
      for (double v : t) {
        const double pos = v * static_cast<double>(nodes);
        require(std::abs(pos - std::round(pos)) < 1e-9,
                "residual quantiles must be multiples of 1/nodes");
      }
    }
    break;
  case Command::Dickman:
    detail::require_grid(x_min, x_max, points);
    require(x_min >= 0.0, "x-min must be nonnegative");
    break;
  case Command::Tails:
    require(what == "mgf" || what == "envelope",
            "tails --what must be mgf or envelope");
    require(theta_max > 0.0 && theta_max <= 8.0,
            "theta-max must lie in (0, 8]");
    require(step > 0.0 && step <= theta_max, "step must lie in (0, theta-max]");
    require(tol > 0.0, "tol must be positive");
    if (what == "envelope") {
      detail::require_grid(x_min, x_max, points);
      require(x_min > 1.0, "envelope grid needs x-min > 1");
      for (double v : t) {
        require(v > 0.0 && v < 1.0, "envelope needs 0 < t < 1");
      }
    }
    break;
  case Command::Series:
    require(k_max >= 1, "k-max must be at least 1");
    require(samples >= 2, "samples must be at least 2");
    break;
  case Command::Converge:
    detail::require_positive(reps, "reps");
    detail::require_one(t);
    if (!ld_x.empty()) {
      require(n.size() <= 1, "--ld-x takes a single --n");
      require(ld_c > 1.0, "ld-c must exceed 1");
      require(ld_omega > 0.0, "ld-omega must be positive");
    }
    break;
  case Command::Validate:
    require(suite == "all" || suite == "quick", "suite must be all or quick");
    break;
  }
}

inline nlohmann::json to_json(const RunConfig &c) {
  nlohmann::json j;
  j["command"] = to_string(c.command);
  j["kind"] = c.kind;
  j["what"] = c.what;
  j["t"] = c.t;
  j["n"] = c.n;
  j["m"] = c.m ? nlohmann::json(*c.m) : nlohmann::json(nullptr);
  j["reps"] = c.reps;
  j["samples"] = c.samples;
  j["nodes"] = c.nodes;
  j["trunc_eps"] = c.trunc_eps;
  j["x_min"] = c.x_min;
  j["x_max"] = c.x_max;
  j["points"] = c.points;
  j["step"] = c.step;
  j["theta_max"] = c.theta_max;
  j["tol"] = c.tol;
  j["k_max"] = c.k_max;
  j["ld_x"] = c.ld_x;
  j["ld_c"] = c.ld_c;
  j["ld_omega"] = c.ld_omega;
  j["suite"] = c.suite;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out_path;
  return j;
}

} // namespace qqlab

#endif // QQLAB_CONFIG_HPP_
