// fracreg: command-line front end. Exit codes: 0 ok, 2 config/domain error,
// 3 internal invariant violation. Failures print `error[Tag]: message`.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fracreg/bounds/curve.hpp"
#include "fracreg/bounds/optimizer.hpp"
#include "fracreg/dim/counting.hpp"
#include "fracreg/dim/covering.hpp"
#include "fracreg/extension/extended_field.hpp"
#include "fracreg/io/config.hpp"
#include "fracreg/io/files.hpp"
#include "fracreg/io/snapshot.hpp"
#include "fracreg/local/lemmas.hpp"
#include "fracreg/local/provider.hpp"
#include "fracreg/local/quantities.hpp"
#include "fracreg/spectral/reports.hpp"

namespace fs = std::filesystem;
using namespace fracreg;

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void out_line(const std::string& s) { std::fputs((s + "\n").c_str(), stdout); }

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvariantViolation:
    case ErrorCode::InfeasibleAtGammaZero:
    case ErrorCode::BvpNoConvergence:
      return 3;
    default:
      return 2;
  }
}

int report_error(ErrorCode c, std::string msg) {
  const std::string tag(to_string(c));
  if (msg.rfind(tag + ": ", 0) == 0) msg.erase(0, tag.size() + 2);
  std::fprintf(stderr, "error[%s]: %s\n", tag.c_str(), msg.c_str());
  return exit_code(c);
}

// ---------------------------------------------------------------- shared options

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
  std::optional<double> alpha;
  std::string out;

  void attach(CLI::App* app, bool with_out = true) {
    app->add_option("-c,--config", file, "key = value run configuration");
    app->add_option("--set", sets, "override a config key (key=value), repeatable");
    app->add_option("--alpha", alpha, "dissipation exponent in (1, 5/4)");
    if (with_out) app->add_option("-o,--out", out, "output directory (overrides output_dir)");
  }

  io::RunConfig load() const {
    io::Overrides ov;
    for (const auto& s : sets) ov.push_back(io::split_override(s));
    if (alpha) ov.emplace_back("alpha", fmt("%.17g", *alpha));
    if (!out.empty()) ov.emplace_back("output_dir", out);
    return io::parse_config(file.empty() ? std::string() : io::read_file(file), ov);
  }
};

std::vector<double> parse_list(const std::string& what, const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(start, end - start);
    char* stop = nullptr;
    const double v = std::strtod(item.c_str(), &stop);
    if (item.empty() || *stop != '\0') fail(ErrorCode::ConfigError, what + ": bad number '" + item + "'");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------- bounds

struct BoundsArgs {
  int points = 999;
  bool no_closure = false;
  double lo = kAlphaLower, hi = kAlphaUpper;
  std::string out = "out";
};

std::string run_bounds(const BoundsArgs& a) {
  require(a.points >= 1, ErrorCode::ConfigError, "--points must be >= 1");
  require(std::isfinite(a.lo) && std::isfinite(a.hi) && kAlphaLower <= a.lo && a.lo < a.hi && a.hi <= kAlphaUpper,
          ErrorCode::DomainViolation, "alpha range must satisfy 1 <= lo < hi <= 5/4");
  // The closure row at alpha = 1 counts toward --points.
  const bool closure = !a.no_closure && a.lo == kAlphaLower;
  const int interior = a.points - (closure ? 1 : 0);
  require(interior >= 1 || closure, ErrorCode::ConfigError, "--points too small");
  const auto grid = interior > 0 ? bounds::interior_alpha_grid(interior, a.lo, a.hi) : std::vector<double>{};
  const auto curve = bounds::bound_curve(grid, closure);
  const fs::path dir(a.out);
  io::write_file_atomic(dir / "bounds.csv", bounds::curve_csv(curve));
  io::write_file_atomic(dir / "bounds.svg", bounds::curve_svg(curve));
  return fmt("bounds: %zu rows -> %s", curve.rows.size(), (dir / "bounds.csv").string().c_str());
}

// ---------------------------------------------------------------- optimize

std::string run_optimize(double alpha, const std::vector<double>& schedule) {
  (void)AlphaParams::closure(alpha);  // outside [1, 5/4] is a domain error, not infeasibility
  const auto opt = bounds::optimize_gamma(alpha, schedule);
  const AlphaParams a = bounds::clamp_for_optimizer(alpha);
  const double gap = bounds::eval_L(a) - bounds::eval_J(a);
  const auto& w = opt.best();
  const auto& m = w.margins;
  if (!(std::abs(opt.gamma_star - gap) <= 1e-4))
    fail(ErrorCode::InvariantViolation, fmt("gamma* = %.12g departs from L - J = %.12g", opt.gamma_star, gap));
  for (double v : m.m)
    if (v < 0.0) fail(ErrorCode::InvariantViolation, "witness has a negative margin");
  std::string s;
  s += fmt("alpha = %.12g\n", opt.alpha);
  s += fmt("L = %.12g\nJ = %.12g\nL - J = %.12g\n", bounds::eval_L(a), bounds::eval_J(a), gap);
  s += fmt("gamma_star = %.12g\n", opt.gamma_star);
  s += fmt("witness: eta = %.12g, zeta = %.6g, N = %ld, gamma = %.12g\n", w.params.eta, w.params.zeta,
           w.params.n_steps, w.params.gamma);
  s += fmt("zeta_cap = %.6g\n", bounds::zeta_admissibility_cap(a, w.params.gamma));
  s += fmt("margins = %.6g, %.6g, %.6g, %.6g, %.6g\n", m.m[0], m.m[1], m.m[2], m.m[3], m.m[4]);
  s += "schedule: zeta, feasible, gamma_continuous, N\n";
  for (const auto& x : opt.witnesses)
    s += fmt("  %.6g, %d, %.12g, %ld\n", x.zeta, x.feasible ? 1 : 0, x.gamma_continuous, x.params.n_steps);
  return s;
}

// ---------------------------------------------------------------- extend

std::string run_extend(double alpha, const std::vector<double>& table, double s_max, const fs::path& dir) {
  const AlphaParams a(alpha);
  const auto prof = extension::make_profile(a, s_max);
  io::write_file_atomic(dir / "profile.csv", extension::profile_csv(*prof));
  std::vector<extension::ConstantRow> rows;
  for (double t : table) {
    const auto p = extension::make_profile(AlphaParams(t), s_max);
    rows.push_back({t, p->i_alpha, extension::c_alpha(*p)});
  }
  io::write_file_atomic(dir / "constants.csv", extension::constant_csv(rows));
  return fmt("extend: alpha = %.12g, i_alpha = %.12g, c_alpha = %.12g", alpha, prof->i_alpha,
             extension::c_alpha(*prof));
}

// ---------------------------------------------------------------- simulate

std::string energy_csv(const spectral::EnergyReport& r) {
  std::string out = "s,t,residual\n";
  for (const auto& i : r.intervals) out += fmt("%.12g,%.12g,%.6e\n", i.s, i.t, i.residual);
  return out;
}

spectral::Trajectory run_simulation(const io::RunConfig& c, const fs::path& dir, std::string& summary) {
  const auto tr = spectral::simulate(io::initial_state(c), c.alpha_params(), {c.dt, c.t_end, c.dt_output, {}});
  io::save_trajectory(dir / "snapshots", tr);
  io::write_file_atomic(dir / "config.txt", io::describe(c));
  summary = fmt("simulate: %zu snapshots, t in [%.6g, %.6g] -> %s\n", tr.snapshots.size(), tr.t_begin(), tr.t_end(),
                (dir / "snapshots").string().c_str());
  if (tr.snapshots.size() >= 2) {
    const auto rep = spectral::global_energy_report(tr);
    io::write_file_atomic(dir / "energy.csv", energy_csv(rep));
    summary += fmt("energy: E0 = %.12g, worst residual = %.3e, suitable_grade = %d, decreasing = %d\n",
                   rep.energy_scale, rep.worst, rep.suitable_grade ? 1 : 0, rep.strictly_decreasing ? 1 : 0);
  } else {
    summary += "energy: single snapshot, no intervals\n";
  }
  summary += std::string("caveat: ") + local::kTorusCaveat;
  return tr;
}

// ---------------------------------------------------------------- quantify

std::vector<local::SpaceTimePoint> centers_for(const io::RunConfig& c, const spectral::Trajectory& tr) {
  if (!c.centers.empty()) return c.centers;
  const double h = 0.5 * tr.grid().box_length();
  return {{{h, h, h}, tr.t_end()}};
}

bool skippable(ErrorCode c) {
  return c == ErrorCode::RadiusUnresolved || c == ErrorCode::CylinderOutOfWindow;
}

std::string run_quantify(const io::RunConfig& c, const spectral::Trajectory& tr, const fs::path& dir) {
  require(c.alpha_params() == tr.alpha, ErrorCode::ConfigError,
          fmt("config alpha %.12g differs from the snapshots' alpha %.12g", c.alpha, tr.alpha.alpha()));
  const local::ExtensionProvider prov(extension::make_profile(tr.alpha));
  const auto centers = centers_for(c, tr);
  const auto rows = local::compute_quantities_batch(tr, &prov, centers, c.radii);
  io::write_file_atomic(dir / "quantities.csv", local::quantity_csv(rows));

  // Lemma sweeps at rho = largest radius, r = rho/2, rho/4, rho/8; rows grouped by center.
  const double rho = *std::max_element(c.radii.begin(), c.radii.end());
  std::vector<local::RatioRow> interp, press, embed, energy;
  std::size_t skipped = 0;
  for (const auto& z : centers) {
    std::size_t k = 0;
    while (k + 1 < tr.snapshots.size() && tr.snapshots[k + 1]->time() <= z.t + local::time_tolerance(tr)) ++k;
    for (double div : {2.0, 4.0, 8.0}) {
      const double r = rho / div;
      auto attempt = [&](std::vector<local::RatioRow>& dst, auto&& f) {
        try {
          dst.push_back({r, rho, f()});
        } catch (const Error& e) {
          if (!skippable(e.code())) throw;
          ++skipped;
          std::fprintf(stderr, "note: skipped r = %.6g, rho = %.6g (%s)\n", r, rho,
                       std::string(to_string(e.code())).c_str());
        }
      };
      attempt(interp, [&] { return local::interpolation_ratio(tr, prov, z, r, rho); });
      attempt(press, [&] { return local::pressure_decay_ratio(tr, z, r, rho); });
      attempt(embed, [&] { return local::embedding_ratio(tr.snapshots[k], prov, z.x, r, rho); });
      attempt(energy, [&] { return local::local_energy_ratio(tr, prov, z, r); });
    }
  }
  io::write_file_atomic(dir / "ratio_interpolation.csv", local::ratio_csv(interp));
  io::write_file_atomic(dir / "ratio_pressure.csv", local::ratio_csv(press));
  io::write_file_atomic(dir / "ratio_embedding.csv", local::ratio_csv(embed));
  io::write_file_atomic(dir / "ratio_local_energy.csv", local::ratio_csv(energy));

  std::size_t small = 0;
  for (const auto& q : rows) small += q.epsilon_sum < c.epsilon_0;
  return fmt("quantify: %zu rows, %zu below epsilon_0 = %.6g, %zu lemma pairs skipped -> %s\n", rows.size(), small,
             c.epsilon_0, skipped, (dir / "quantities.csv").string().c_str()) +
         std::string("caveat: ") + local::kTorusCaveat;
}

// ---------------------------------------------------------------- dimension

struct DimensionArgs {
  std::string points_file, lattice;
  double r_min = std::ldexp(1.0, -20), r_max = 0.25;
  double alpha = 1.2;
  std::string out = "out";
  bool r_min_given = false, r_max_given = false;
};

std::string run_dimension(const DimensionArgs& d) {
  const AlphaParams a(d.alpha);
  require(d.points_file.empty() != d.lattice.empty(), ErrorCode::ConfigError,
          "give exactly one of --points or --lattice");
  dim::DimensionEstimate est;
  std::string what;
  if (!d.points_file.empty()) {
    const auto s = dim::parse_points_csv(io::read_file(d.points_file), a);
    est = dim::box_dimension(s, d.r_min, d.r_max);
    what = fmt("%zu points", s.size());
  } else {
    const auto v = parse_list("--lattice", d.lattice);
    require(v.size() == 3 && (v[0] == 1 || v[0] == 3) && v[1] >= 1 && v[2] >= 1 && v[1] == std::floor(v[1]) &&
                v[2] == std::floor(v[2]),
            ErrorCode::ConfigError, "--lattice expects d,space_points,time_points with d in {1,3}");
    const auto p = dim::ProductLattice::uniform(static_cast<int>(v[0]), a, static_cast<std::size_t>(v[1]),
                                                static_cast<std::size_t>(v[2]));
    // Below ~16 lattice spacings the count saturates; keep the default window above that.
    double r_min = d.r_min;
    if (!d.r_min_given) {
      const double space = 16.0 / v[1], time = std::pow(16.0 / v[2], 0.5 / d.alpha);
      r_min = std::exp2(std::ceil(std::log2(std::max(space, time)) - 1e-12));
    }
    est = dim::box_dimension(p, r_min, d.r_max_given ? d.r_max : 0.5);
    what = fmt("lattice %g x %g^%g", v[2], v[1], v[0]);
  }
  io::write_file_atomic(fs::path(d.out) / "dimension.csv", dim::dimension_csv(est));
  return fmt("dimension: %s, alpha = %.6g, estimate = %.6f, residual = %.3g (fit radii %zu..%zu of %zu)", what.c_str(),
             d.alpha, est.dimension, est.residual, est.fit_begin, est.fit_end, est.radii.size());
}

// ---------------------------------------------------------------- report

std::string run_report(const io::RunConfig& c, int bound_points) {
  const fs::path dir(c.output_dir);
  std::string md = "# fracreg report\n\n```\n" + io::describe(c) + "```\n\n";
  auto section = [&](const std::string& title, const std::string& body) {
    md += "## " + title + "\n\n```\n" + body + (body.empty() || body.back() == '\n' ? "" : "\n") + "```\n\n";
    out_line(body);
  };

  BoundsArgs b;
  b.points = bound_points;
  b.out = (dir / "bounds").string();
  section("Bounds", run_bounds(b));
  const std::string opt = run_optimize(c.alpha, bounds::default_zeta_schedule());
  io::write_file_atomic(dir / "optimize.txt", opt);
  section("Optimizer", opt);
  section("Extension", run_extend(c.alpha, {c.alpha}, 60.0, dir / "extension"));

  std::string sim;
  const auto tr = run_simulation(c, dir, sim);
  section("Simulation", sim);
  section("Local quantities", run_quantify(c, tr, dir));

  // Counting chain on the candidate set of the run at the smallest radius.
  const double r = *std::min_element(c.radii.begin(), c.radii.end());
  std::string count;
  try {
    const auto cand = dim::singular_candidates(tr, c.epsilon_0, r);
    std::vector<double> sched;
    const double dx = tr.grid().dx();
    for (double a = tr.grid().box_length() / 4; a >= 2.0 * dx * (1 - 1e-12); a /= 2) sched.push_back(a);
    require(!sched.empty(), ErrorCode::RadiusUnresolved, "grid too coarse for any counting scale");
    const local::ExtensionProvider prov(extension::make_profile(tr.alpha), 21);
    const auto rep = dim::counting_demo(tr, &prov, cand, c.gamma, c.epsilon, sched);
    io::write_file_atomic(dir / "counting.csv", dim::counting_csv(rep));
    std::size_t held = 0;
    for (const auto& row : rep.rows) held += row.holds;
    count = fmt("counting: %zu candidates at r = %.6g, %zu/%zu scales satisfy the budget chain, L = %.12g, gamma = %.6g",
                cand.size(), r, held, rep.rows.size(), rep.l_value, rep.gamma);
  } catch (const Error& e) {
    if (!skippable(e.code())) throw;
    count = std::string("counting: skipped (") + std::string(to_string(e.code())) + ")";
  }
  section("Counting", count);
  md += std::string("Caveat: ") + local::kTorusCaveat + ".\n";
  io::write_file_atomic(dir / "report.md", md);
  return "report: " + (dir / "report.md").string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracreg: partial regularity diagnostics for hyperdissipative Navier-Stokes"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  BoundsArgs bargs;
  auto* bounds_cmd = app.add_subcommand("bounds", "L, J and gamma* curves as CSV and SVG");
  bounds_cmd->add_option("--points", bargs.points, "rows including the alpha = 1 closure row")->capture_default_str();
  bounds_cmd->add_flag("--no-closure", bargs.no_closure, "omit the alpha = 1 row");
  bounds_cmd->add_option("--alpha-min", bargs.lo)->capture_default_str();
  bounds_cmd->add_option("--alpha-max", bargs.hi)->capture_default_str();
  bounds_cmd->add_option("-o,--out", bargs.out)->capture_default_str();

  double opt_alpha = 1.1;
  std::string opt_schedule;
  auto* optimize_cmd = app.add_subcommand("optimize", "gamma* with an integer witness and its margins");
  optimize_cmd->add_option("--alpha", opt_alpha)->required();
  optimize_cmd->add_option("--zeta", opt_schedule, "strictly decreasing comma list");

  ConfigArgs ext_cfg;
  double s_max = 60.0;
  std::string ext_table;
  auto* extend_cmd = app.add_subcommand("extend", "extension profile and c_alpha table");
  ext_cfg.attach(extend_cmd);
  extend_cmd->add_option("--s-max", s_max)->capture_default_str();
  extend_cmd->add_option("--table", ext_table, "alphas for constants.csv (default 1.05,1.1,1.15,1.2,1.24)");

  ConfigArgs sim_cfg;
  auto* simulate_cmd = app.add_subcommand("simulate", "run the solver and store snapshots");
  sim_cfg.attach(simulate_cmd);

  ConfigArgs q_cfg;
  std::string snap_dir, q_radii, q_centers;
  auto* quantify_cmd = app.add_subcommand("quantify", "scale-invariant quantities and lemma ratios");
  q_cfg.attach(quantify_cmd);
  quantify_cmd->add_option("--snapshots", snap_dir, "directory of snap_*.fnse")->required();
  quantify_cmd->add_option("--radii", q_radii, "comma list");
  quantify_cmd->add_option("--centers", q_centers, "'x,y,z,t; ...'");

  DimensionArgs dargs;
  auto* dimension_cmd = app.add_subcommand("dimension", "parabolic box-counting dimension");
  dimension_cmd->add_option("--points", dargs.points_file, "CSV with header x1,t or x1,x2,x3,t");
  dimension_cmd->add_option("--lattice", dargs.lattice, "d,space_points,time_points on [0,1)^d x [0,1)");
  dimension_cmd->add_option("--alpha", dargs.alpha)->capture_default_str();
  auto* r_min_opt = dimension_cmd->add_option("--r-min", dargs.r_min, "default 2^-20, lattices: 16 spacings")
                        ->capture_default_str();
  auto* r_max_opt = dimension_cmd->add_option("--r-max", dargs.r_max, "default 0.25, lattices: 0.5")->capture_default_str();
  dimension_cmd->add_option("-o,--out", dargs.out)->capture_default_str();

  ConfigArgs rep_cfg;
  int rep_points = 199;
  auto* report_cmd = app.add_subcommand("report", "run everything for one config and bundle the outputs");
  rep_cfg.attach(report_cmd);
  report_cmd->add_option("--bound-points", rep_points)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorCode::ConfigError, e.what());
  }

  try {
    if (*bounds_cmd) {
      out_line(run_bounds(bargs));
    } else if (*optimize_cmd) {
      const auto sched = opt_schedule.empty() ? bounds::default_zeta_schedule() : parse_list("--zeta", opt_schedule);
      std::fputs(run_optimize(opt_alpha, sched).c_str(), stdout);
    } else if (*extend_cmd) {
      const auto c = ext_cfg.load();
      const auto table = ext_table.empty() ? std::vector<double>{1.05, 1.1, 1.15, 1.2, 1.24}
                                           : parse_list("--table", ext_table);
      out_line(run_extend(c.alpha, table, s_max, c.output_dir));
    } else if (*simulate_cmd) {
      const auto c = sim_cfg.load();
      std::string summary;
      run_simulation(c, c.output_dir, summary);
      out_line(summary);
    } else if (*quantify_cmd) {
      auto cfg = q_cfg;
      if (!q_radii.empty()) cfg.sets.push_back("radii=" + q_radii);
      if (!q_centers.empty()) cfg.sets.push_back("centers=" + q_centers);
      const auto tr = io::load_trajectory(snap_dir);
      // The snapshots carry alpha; only an explicit --alpha is checked against it.
      if (!cfg.alpha) cfg.alpha = tr.alpha.alpha();
      const auto c = cfg.load();
      out_line(run_quantify(c, tr, c.output_dir));
    } else if (*dimension_cmd) {
      dargs.r_min_given = r_min_opt->count() > 0;
      dargs.r_max_given = r_max_opt->count() > 0;
      out_line(run_dimension(dargs));
    } else if (*report_cmd) {
      out_line(run_report(rep_cfg.load(), rep_points));
    }
  } catch (const Error& e) {
    return report_error(e.code(), e.what());
  } catch (const std::exception& e) {
    return report_error(ErrorCode::InvariantViolation, e.what());
  }
  return 0;
}
