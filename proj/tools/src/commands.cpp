#include "wiener_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <vector>

#include "wiener/csv.hpp"
#include "wiener/error.hpp"
#include "wiener/oracle.hpp"
#include "wiener/propagator.hpp"

namespace wiener::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const char* name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw ValidationError("out: cannot write " + (dir / name).string());
  return os;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kResourceCap;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

SolveOptions solve_options(const ScenarioConfig& c, const EvolutionProblem& p, const CommandOptions& o,
                           std::size_t stride) {
  SolveOptions opts;
  opts.stride = stride;
  opts.weights = configured_weights(c);
  opts.r_exponent = c.r_exponent;
  opts.seed = c.seed;
  opts.workers = o.workers;
  opts.ck = estimate_all_Ck(p, c.seed);
  return opts;
}

struct Row {
  std::string quantity;
  double chaos = 0.0;
  double oracle = 0.0;
  double tolerance = 0.0;

  [[nodiscard]] bool pass() const { return std::isfinite(chaos) && std::abs(chaos - oracle) <= tolerance; }
};

double poisson_upper_tail(double x, unsigned n) {
  double term = std::exp(-x);
  double cdf = term;
  for (unsigned k = 1; k <= n; ++k) {
    term *= x / k;
    cdf += term;
  }
  return std::max(0.0, 1.0 - cdf);
}

Complex projection(const CoefficientSpace& space, const Vector& u, const Vector& ref) {
  return space.inner({u.data(), static_cast<std::size_t>(u.size())}, {ref.data(), static_cast<std::size_t>(ref.size())});
}

void closed_form_rows(const ScenarioConfig& c, const PropagatorSolution& sol, std::vector<Row>& rows) {
  const EvolutionProblem& p = sol.problem();
  const bool ito = c.noise == "time-white";
  const bool wick = c.noise == "single-gaussian";
  if (!(ito || wick) || !p.forcing.empty()) return;
  const SpatialAction* b = p.m.action(1);
  const Vector c0 = Eigen::Map<const Vector>(p.u0.coeff(0).data(), static_cast<Eigen::Index>(p.space.dim()));
  const Vector a = p.a.diagonal(0.0);
  const double t = p.horizon;
  const double floor = 1e-30 * c0.cwiseAbs2().maxCoeff();
  double max_rel = 0.0;
  double chaos_sum = 0.0;
  double oracle_sum = 0.0;
  for (Eigen::Index i = 0; i < c0.size(); ++i) {
    if (std::norm(c0[i]) <= floor) continue;
    const Complex bi = b ? b->diagonal()[i] : Complex{};
    const double x = std::norm(bi) * (ito ? t : t * t);
    if (poisson_upper_tail(x, p.box.max_order) > 1e-3) continue;
    const double oracle = ito ? ito_mode_moment(a[i], bi, t, c0[i]) : wick_mode_moment(a[i], bi, t, c0[i]);
    const double chaos = sol.stats().mode_second_moment(i, static_cast<Eigen::Index>(p.steps));
    max_rel = std::max(max_rel, std::abs(chaos - oracle) / oracle);
    chaos_sum += p.space.weights()[static_cast<std::size_t>(i)] * chaos;
    oracle_sum += p.space.weights()[static_cast<std::size_t>(i)] * oracle;
  }
  if (oracle_sum == 0.0) return;
  rows.push_back({"mode_moment_T_max_rel_error", max_rel, 0.0, 2e-3});
  rows.push_back({"mode_moment_T_band_sum", chaos_sum, oracle_sum, 2e-3 * oracle_sum});
}

void mean_rows(const PropagatorSolution& sol, std::vector<Row>& rows) {
  const EvolutionProblem& p = sol.problem();
  if (!p.forcing.empty() || !p.a.is_diagonal()) return;
  const Vector c0 = Eigen::Map<const Vector>(p.u0.coeff(0).data(), static_cast<Eigen::Index>(p.space.dim()));
  const Vector exact = semigroup_apply(p.a, p.horizon, 0.0, c0);
  const Vector got = sol.mean().col(static_cast<Eigen::Index>(p.steps));
  const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
  rows.push_back({"mean_T_max_abs_error", (got - exact).cwiseAbs().maxCoeff(), 0.0, 1e-6 * scale});
}

void mc_rows(const ScenarioConfig& c, const PropagatorSolution& sol, const CommandOptions& o,
             const std::filesystem::path& dir, std::vector<Row>& rows) {
  if (c.mc_paths == 0 || c.noise != "time-white") return;
  const EvolutionProblem& p = sol.problem();
  McOptions mo;
  mo.paths = c.mc_paths;
  mo.steps = c.mc_steps;
  mo.seed = c.seed;
  mo.workers = o.workers;
  const McResult mc = mc_ito(p, mo);
  {
    auto os = open_output(dir, "mc.csv");
    csv::Writer w(os, {"t", "mean", "mean_se", "m2", "m2_se"});
    for (std::size_t j = 0; j < mc.times.size(); ++j) {
      w.cell(mc.times[j]).cell(mc.mean[j]).cell(mc.mean_se[j]).cell(mc.m2[j]).cell(mc.m2_se[j]);
      w.end_row();
    }
  }
  const Vector c0 = Eigen::Map<const Vector>(p.u0.coeff(0).data(), static_cast<Eigen::Index>(p.space.dim()));
  const double u0_norm = std::sqrt(p.space.norm_sq({c0.data(), static_cast<std::size_t>(c0.size())}));
  for (std::size_t quarter = 1; quarter <= 4; ++quarter) {
    const std::size_t j = p.steps * quarter / 4;
    const double chaos = projection(p.space, sol.mean().col(static_cast<Eigen::Index>(j)), c0).real() / u0_norm;
    rows.push_back({"mc_mean_t=" + csv::format(p.time(j)), chaos, mc.mean[j], 3.0 * mc.mean_se[j]});
  }
  rows.push_back({"mc_m2_T", sol.stats().second_moment.back(), mc.m2.back(), 3.0 * mc.m2_se.back()});
}

void u_h_rows(const ScenarioConfig& c, const PropagatorSolution& sol, std::vector<Row>& rows, std::ostream& err) {
  const EvolutionProblem& p = sol.problem();
  if (!p.deterministic_data()) return;
  const DirectionH h = configured_direction(c);
  if (!smallness_radius(h, sol.weights())) {
    err << "note: u_h check skipped, h has no smallness radius for the weights\n";
    return;
  }
  const auto parts = u_h_pairing_by_order(sol, h);
  const Matrix chaos = u_h_pairing(sol, h);
  const Matrix oracle = solve_deterministic_h(p, h);
  double distance = 0.0;
  double scale = 0.0;
  double tail = 0.0;
  const auto& cols = sol.stored_steps();
  for (std::size_t s = 0; s < cols.size(); ++s) {
    const Vector diff = chaos.col(static_cast<Eigen::Index>(s)) - oracle.col(static_cast<Eigen::Index>(cols[s]));
    const Vector ref = oracle.col(static_cast<Eigen::Index>(cols[s]));
    const Vector top = parts.back().col(static_cast<Eigen::Index>(s));
    distance = std::max(distance, std::sqrt(p.space.norm_sq({diff.data(), static_cast<std::size_t>(diff.size())})));
    scale = std::max(scale, std::sqrt(p.space.norm_sq({ref.data(), static_cast<std::size_t>(ref.size())})));
    tail = std::max(tail, std::sqrt(p.space.norm_sq({top.data(), static_cast<std::size_t>(top.size())})));
  }
  rows.push_back({"u_h_max_distance", distance, 0.0, 1e-6 * std::max(1.0, scale) + tail});
}

}  // namespace

ScenarioConfig load_config(const CommandOptions& o) {
  if (o.config.empty()) throw ValidationError("config: no configuration file given");
  ScenarioConfig c = load_scenario(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.order) c.chaos_order = *o.order;
  if (o.modes) c.chaos_modes = *o.modes;
  c.validate();
  return c;
}

std::string regime(const ScenarioConfig& c) {
  const auto name = [](Integrability i) {
    switch (i) {
      case Integrability::integrable:
        return "integrable";
      case Integrability::boundary:
        return "boundary";
      default:
        return "non-integrable";
    }
  };
  if (c.equation == "ode") return "integrable";
  if (c.a2 <= 0.0) return "n/a";
  const double scaled = c.sigma / std::sqrt(c.a2);
  if (c.noise == "time-white") return name(classify_ito_moment(c.m_order, scaled));
  if (c.noise == "single-gaussian" && c.m_order == 1) return name(classify_wick_space(c.horizon, scaled));
  if (c.noise == "single-gaussian" && c.m_order == 0) return "integrable";
  return "n/a";
}

int run_solve(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(o);
    auto problem = build_problem(c);
    const SolveOptions opts = solve_options(c, *problem, o, c.effective_stride());
    const PropagatorSolution sol = solve(problem, opts);
    const EvolutionProblem& p = sol.problem();
    {
      auto os = open_output(o.out, "coeffs.csv");
      csv::Writer w(os, {"alpha", "t", "component", "re", "im"});
      for (std::size_t i = 0; i < sol.index().size(); ++i) {
        const std::string alpha = sol.index()[i].to_string();
        const Matrix& u = sol.trajectory(i);
        for (std::size_t s = 0; s < sol.stored_steps().size(); ++s) {
          const double t = p.time(sol.stored_steps()[s]);
          for (Eigen::Index q = 0; q < u.rows(); ++q) {
            const Complex v = u(q, static_cast<Eigen::Index>(s));
            w.cell(std::string_view(alpha)).cell(t).cell(static_cast<long long>(q)).cell(v.real()).cell(v.imag());
            w.end_row();
          }
        }
      }
    }
    {
      auto os = open_output(o.out, "stats.csv");
      csv::Writer w(os, {"t", "mean_norm", "second_moment_norm", "weighted_norm"});
      const auto& st = sol.stats();
      for (std::size_t j = 0; j <= p.steps; ++j) {
        w.cell(p.time(j)).cell(st.mean_norm[j]).cell(st.second_moment[j]).cell(st.weighted_norm[j]);
        w.end_row();
      }
    }
    {
      auto os = open_output(o.out, "weights.csv");
      csv::Writer w(os, {"k", "C_k", "q_k"});
      for (unsigned k = 1; k <= p.box.max_modes; ++k) {
        w.cell(k).cell(sol.ck().at(k - 1)).cell(sol.weights()(k));
        w.end_row();
      }
    }
    const auto& energy = sol.stats().order_energy_end;
    out << "solve: N=" << p.box.max_order << " K=" << p.box.max_modes << " indices=" << sol.index().size()
        << " weighted_norm_sq=" << csv::format(solution_norm_sq(sol)) << " top_order_energy_T="
        << csv::format(energy.back()) << " regime=" << regime(c) << '\n';
    return kPass;
  });
}

int run_verify(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(o);
    auto problem = build_problem(c);
    const PropagatorSolution sol = solve(problem, solve_options(c, *problem, o, 1));
    std::vector<Row> rows;
    mean_rows(sol, rows);
    closed_form_rows(c, sol, rows);
    mc_rows(c, sol, o, o.out, rows);
    u_h_rows(c, sol, rows, err);
    if (rows.empty()) throw ValidationError("no oracle applies to this scenario");
    bool all = true;
    {
      auto os = open_output(o.out, "report.csv");
      csv::Writer w(os, {"quantity", "chaos_value", "oracle_value", "tolerance", "pass"});
      for (const Row& r : rows) {
        w.cell(std::string_view(r.quantity)).cell(r.chaos).cell(r.oracle).cell(r.tolerance).cell(r.pass());
        w.end_row();
        all = all && r.pass();
      }
    }
    out << "verify: " << rows.size() << " comparisons, "
        << std::count_if(rows.begin(), rows.end(), [](const Row& r) { return !r.pass(); }) << " failed, regime="
        << regime(c) << '\n';
    return all ? kPass : kVerificationFailed;
  });
}

int run_kv(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(o);
    auto problem = build_problem(c);
    const PropagatorSolution sol = solve(problem, solve_options(c, *problem, o, 1));
    const unsigned n_max = o.nmax.value_or(std::min(4u, c.chaos_order));
    const KvReport kv = kv_recursion(sol, sol.weights(), n_max);
    constexpr double kTolerance = 1e-8;
    bool all = true;
    {
      auto os = open_output(o.out, "kv.csv");
      csv::Writer w(os, {"n", "max_deviation", "scale", "tolerance", "pass"});
      for (std::size_t n = 0; n < kv.max_deviation.size(); ++n) {
        const bool pass = kv.max_deviation[n] <= kTolerance;
        all = all && pass;
        w.cell(static_cast<unsigned long long>(n)).cell(kv.max_deviation[n]).cell(kv.scale[n]).cell(kTolerance).cell(pass);
        w.end_row();
      }
    }
    out << "kv: n_max=" << n_max << " max_deviation="
        << csv::format(*std::max_element(kv.max_deviation.begin(), kv.max_deviation.end())) << '\n';
    return all ? kPass : kVerificationFailed;
  });
}

int run_norms(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig c = load_config(o);
    auto problem = build_problem(c);
    const PropagatorSolution sol = solve(problem, solve_options(c, *problem, o, 1));
    const double r_grid[] = {-4.0, -3.5, -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0};
    auto os = open_output(o.out, "norms.csv");
    csv::Writer w(os, {"r", "order", "weighted_norm_sq"});
    for (double r : r_grid) {
      for (unsigned n = 0; n <= c.chaos_order; ++n) {
        w.cell(r).cell(n).cell(solution_norm_sq(sol, sol.weights(), r, n));
        w.end_row();
      }
    }
    out << "norms: r=" << csv::format(c.r_exponent)
        << " weighted_norm_sq=" << csv::format(solution_norm_sq(sol, sol.weights(), c.r_exponent)) << '\n';
    return kPass;
  });
}

}  // namespace wiener::cli
