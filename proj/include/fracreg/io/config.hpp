#pragma once

// Run configuration: `key = value` lines, `#` starts a comment. Unknown keys,
// duplicates and malformed values are ConfigError. Overrides are applied on
// top of the file before validation, so command-line flags win.

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracreg/core/alpha.hpp"
#include "fracreg/core/error.hpp"
#include "fracreg/local/cylinder.hpp"
#include "fracreg/spectral/solver.hpp"

namespace fracreg::io {

enum class InitKind { TaylorGreen, RandomBandlimited, Zero };

struct InitSpec {
  InitKind kind = InitKind::TaylorGreen;
  double amplitude = 1.0;
  double k_min = 1.0, k_max = 4.0;
  std::optional<std::uint64_t> seed;  // inline seed overrides RunConfig::seed
};

struct RunConfig {
  double alpha = 1.2;
  // solver
  int n_grid = 64;
  double box_length = 2.0 * 3.14159265358979323846;
  double dt = 0.01;
  double t_end = 0.5;
  double dt_output = 0.1;
  InitSpec init;
  std::uint64_t seed = 1;
  // analysis
  double epsilon_0 = 0.05;
  double epsilon = 0.05;
  double gamma = 0.1;
  std::vector<double> radii = {0.3, 0.6};
  std::vector<local::SpaceTimePoint> centers;  // empty: box centre at the last snapshot
  // paths
  std::string output_dir = "out";

  AlphaParams alpha_params() const { return AlphaParams(alpha); }
  std::uint64_t effective_seed() const { return init.seed.value_or(seed); }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "alpha", "n_grid", "box_length", "dt", "t_end", "dt_output", "init", "seed",
      "epsilon_0", "epsilon", "gamma", "radii", "centers", "output_dir"};
  return keys;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

inline double number(const std::string& key, const std::string& v) {
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorCode::ConfigError, key + ": expected a number, got '" + v + "'");
  return d;
}

inline long long integer(const std::string& key, const std::string& v) {
  const double d = number(key, v);
  if (d != std::floor(d) || std::abs(d) > 9.0e15)
    fail(ErrorCode::ConfigError, key + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

inline std::vector<double> number_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) {
    if (item.empty()) fail(ErrorCode::ConfigError, key + ": empty list entry");
    out.push_back(number(key, item));
  }
  return out;
}

inline InitSpec parse_init(const std::string& v) {
  InitSpec s;
  const auto open = v.find('(');
  const std::string name = trim(v.substr(0, open));
  std::vector<double> args;
  if (open != std::string::npos) {
    if (v.back() != ')') fail(ErrorCode::ConfigError, "init: missing ')'");
    const std::string inner = v.substr(open + 1, v.size() - open - 2);
    if (!trim(inner).empty()) args = number_list("init", inner);
  }
  if (name == "taylor_green") {
    s.kind = InitKind::TaylorGreen;
    if (args.size() > 1) fail(ErrorCode::ConfigError, "init: taylor_green takes at most an amplitude");
    if (!args.empty()) s.amplitude = args[0];
  } else if (name == "zero") {
    s.kind = InitKind::Zero;
    if (!args.empty()) fail(ErrorCode::ConfigError, "init: zero takes no arguments");
  } else if (name == "random_bandlimited") {
    s.kind = InitKind::RandomBandlimited;
    if (args.size() == 3) {
      if (args[0] < 0 || args[0] != std::floor(args[0]))
        fail(ErrorCode::ConfigError, "init: seed must be a nonnegative integer");
      s.seed = static_cast<std::uint64_t>(args[0]);
      s.k_min = args[1];
      s.k_max = args[2];
    } else if (args.size() == 2) {
      s.k_min = args[0];
      s.k_max = args[1];
    } else if (!args.empty()) {
      fail(ErrorCode::ConfigError, "init: random_bandlimited(seed, k_min, k_max) or (k_min, k_max)");
    }
  } else {
    fail(ErrorCode::ConfigError, "init: unknown initial condition '" + name + "'");
  }
  return s;
}

inline std::vector<local::SpaceTimePoint> parse_centers(const std::string& v) {
  std::vector<local::SpaceTimePoint> out;
  for (const auto& item : split(v, ';')) {
    if (item.empty()) continue;
    const auto xs = number_list("centers", item);
    if (xs.size() != 4) fail(ErrorCode::ConfigError, "centers: each entry is 'x, y, z, t'");
    out.push_back({{xs[0], xs[1], xs[2]}, xs[3]});
  }
  return out;
}

inline void apply(RunConfig& c, const std::string& key, const std::string& v) {
  if (v.empty()) fail(ErrorCode::ConfigError, key + ": empty value");
  if (key == "alpha") c.alpha = number(key, v);
  else if (key == "n_grid") c.n_grid = static_cast<int>(integer(key, v));
  else if (key == "box_length") c.box_length = number(key, v);
  else if (key == "dt") c.dt = number(key, v);
  else if (key == "t_end") c.t_end = number(key, v);
  else if (key == "dt_output") c.dt_output = number(key, v);
  else if (key == "init") c.init = parse_init(v);
  else if (key == "seed") {
    const auto s = integer(key, v);
    if (s < 0) fail(ErrorCode::ConfigError, "seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "epsilon_0") c.epsilon_0 = number(key, v);
  else if (key == "epsilon") c.epsilon = number(key, v);
  else if (key == "gamma") c.gamma = number(key, v);
  else if (key == "radii") c.radii = number_list(key, v);
  else if (key == "centers") c.centers = parse_centers(v);
  else if (key == "output_dir") c.output_dir = v;
  else fail(ErrorCode::ConfigError, "unknown key '" + key + "'");
}

}  // namespace detail

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Splits "key=value"; used for --set.
inline std::pair<std::string, std::string> split_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) fail(ErrorCode::ConfigError, "override must look like key=value: " + kv);
  return {detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1))};
}

inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigError, what);
  };
  need(std::isfinite(c.alpha) && c.alpha > kAlphaLower && c.alpha < kAlphaUpper, "alpha must lie in (1, 5/4)");
  need(c.n_grid >= 8 && c.n_grid <= 512 && c.n_grid % 2 == 0, "n_grid must be even and in [8, 512]");
  need(std::isfinite(c.box_length) && c.box_length > 0, "box_length must be > 0");
  need(std::isfinite(c.dt) && c.dt > 0, "dt must be > 0");
  need(std::isfinite(c.dt_output) && c.dt_output > 0, "dt_output must be > 0");
  need(std::isfinite(c.t_end) && c.t_end >= 0, "t_end must be >= 0");
  const double outs = c.t_end / c.dt_output;
  need(std::abs(outs - std::round(outs)) <= 1e-9 * std::max(1.0, outs), "t_end must be a multiple of dt_output");
  if (c.init.kind == InitKind::RandomBandlimited) {
    need(c.init.k_min >= 0 && c.init.k_max >= c.init.k_min, "init: need 0 <= k_min <= k_max");
    need(c.init.k_max < c.n_grid / 3.0, "init: k_max must sit below n_grid/3");
  }
  need(std::isfinite(c.init.amplitude), "init: amplitude must be finite");
  need(std::isfinite(c.epsilon_0) && c.epsilon_0 > 0, "epsilon_0 must be > 0");
  need(std::isfinite(c.epsilon) && c.epsilon > 0, "epsilon must be > 0");
  need(std::isfinite(c.gamma) && c.gamma > 0, "gamma must be > 0");
  need(!c.radii.empty(), "radii must not be empty");
  for (double r : c.radii) need(std::isfinite(r) && r > 0 && r < c.box_length / 2, "radii must lie in (0, box_length/2)");
  for (const auto& z : c.centers)
    need(std::isfinite(z.x[0]) && std::isfinite(z.x[1]) && std::isfinite(z.x[2]) && std::isfinite(z.t),
         "centers must be finite");
  need(!c.output_dir.empty(), "output_dir must not be empty");
}

inline RunConfig parse_config(const std::string& text, const Overrides& overrides = {}) {
  RunConfig c;
  std::map<std::string, int> seen;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (seen[key]++) fail(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    try {
      detail::apply(c, key, value);
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  for (const auto& [k, v] : overrides) detail::apply(c, k, v);
  validate(c);
  return c;
}

inline spectral::VelocityState initial_state(const RunConfig& c) {
  auto g = spectral::make_grid(c.n_grid, c.box_length);
  switch (c.init.kind) {
    case InitKind::TaylorGreen: return spectral::taylor_green(g, c.init.amplitude);
    case InitKind::Zero: return spectral::VelocityState::zero(g);
    case InitKind::RandomBandlimited:
      return spectral::random_bandlimited(g, c.effective_seed(), c.init.k_min, c.init.k_max);
  }
  return spectral::VelocityState::zero(g);
}

inline std::string describe(const RunConfig& c) {
  char buf[512];
  std::string init;
  switch (c.init.kind) {
    case InitKind::TaylorGreen: init = "taylor_green"; break;
    case InitKind::Zero: init = "zero"; break;
    case InitKind::RandomBandlimited: init = "random_bandlimited"; break;
  }
  std::snprintf(buf, sizeof buf,
                "alpha = %.17g\nn_grid = %d\nbox_length = %.17g\ndt = %.17g\nt_end = %.17g\ndt_output = %.17g\n"
                "init = %s\nseed = %llu\nepsilon_0 = %.17g\nepsilon = %.17g\ngamma = %.17g\n",
                c.alpha, c.n_grid, c.box_length, c.dt, c.t_end, c.dt_output, init.c_str(),
                static_cast<unsigned long long>(c.effective_seed()), c.epsilon_0, c.epsilon, c.gamma);
  return buf;
}

}  // namespace fracreg::io
