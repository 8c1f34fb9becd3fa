#include "hivpip/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hivpip {

namespace {

CellField clamp01(CellField v) {
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return v;
}

double relative_change(const TimeMesh& mesh, const CellField& from,
                       const CellField& to) {
  CellField diff(from.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = to[k] - from[k];
  const double base = std::max(l2_norm_cells(mesh, from), 1e-12);
  return l2_norm_cells(mesh, diff) / base;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!(theta > 0.0))
    throw std::invalid_argument("OptimizerConfig: theta must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0))
    throw std::invalid_argument("OptimizerConfig: beta1 must be in (0,1)");
  if (max_cg_iters < 1)
    throw std::invalid_argument("OptimizerConfig: max_cg_iters must be >= 1");
  if (max_refinements < 0)
    throw std::invalid_argument("OptimizerConfig: max_refinements must be >= 0");
  if (!(growth_factor >= 1.0))
    throw std::invalid_argument("OptimizerConfig: growth_factor must be >= 1");
  if (!(stabilization_tol >= 0.0))
    throw std::invalid_argument(
        "OptimizerConfig: stabilization_tol must be >= 0");
}

std::pair<CellField, double> cg_step(const TimeMesh& mesh,
                                     const CellField& g_now,
                                     const CellField* g_prev,
                                     const CellField* d_prev) {
  if (g_now.size() != mesh.cell_count())
    throw std::invalid_argument("cg_step: field/mesh mismatch");
  double beta = 0.0;
  CellField d(g_now.size());
  if (g_prev && d_prev) {
    const double denom = inner_product_cells(mesh, *g_prev, *g_prev);
    if (denom > 0.0) beta = inner_product_cells(mesh, g_now, g_now) / denom;
    for (std::size_t k = 0; k < d.size(); ++k)
      d[k] = -g_now[k] + beta * (*d_prev)[k];
  } else {
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = -g_now[k];
  }
  if (inner_product_cells(mesh, g_now, d) >= 0.0) {
    // not a descent direction: restart from steepest descent
    beta = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = -g_now[k];
  }
  return {std::move(d), beta};
}

double step_size(const TimeMesh& mesh, const CellField& g, const CellField& d,
                 double gamma) {
  const double dd = inner_product_cells(mesh, d, d);
  if (dd == 0.0) throw std::invalid_argument("step_size: zero direction");
  return -inner_product_cells(mesh, g, d) / (gamma * dd);
}

CgResult run_cga(const InverseProblem& problem, const TikhonovConfig& tik,
                 const TimeMesh& mesh, const CellField& eta_init,
                 const OptimizerConfig& cfg) {
  cfg.validate();
  if (!(tik.gamma > 0.0))
    throw std::invalid_argument("run_cga: gamma must be > 0");
  if (eta_init.size() != mesh.cell_count())
    throw std::invalid_argument("run_cga: eta_init does not live on the mesh");
  for (double x : eta_init)
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("run_cga: eta_init must lie in [0,1]");

  CgResult res;
  res.residual_norm = std::numeric_limits<double>::infinity();
  CellField eta = eta_init;
  CellField g_prev, d_prev;
  bool have_prev = false;
  double min_rnorm = std::numeric_limits<double>::infinity();
  double j_prev = std::numeric_limits<double>::infinity();
  bool clamped_last = false;

  for (int m = 0;; ++m) {
    const StateTrajectory u =
        solve_forward(problem.params, problem.u0, eta, mesh, cfg.newton);
    const AdjointTrajectory lam =
        solve_adjoint(problem.params, u, eta, problem.obs, problem.weight,
                      cfg.newton);
    const CellField g = gradient_nodal(u, lam, eta, tik, problem.params);
    const ResidualField r = residual_field(u, lam, eta, tik, problem.params);
    const double rnorm = l2_norm_cells(mesh, r);
    const double j = tikhonov_value(u, problem.obs, problem.weight, tik, eta);
    res.log.push_back({m, j, l2_norm_cells(mesh, g), rnorm, 0.0, 0.0, eta});

    if (rnorm < res.residual_norm) {
      res.residual_norm = rnorm;
      res.eta = eta;
    }
    min_rnorm = std::min(min_rnorm, rnorm);

    if (rnorm <= cfg.theta) {
      res.stop = CgStop::tolerance;
      break;
    }
    if (rnorm > cfg.growth_factor * min_rnorm) {
      res.stop = CgStop::growth;
      break;
    }
    if (m >= cfg.max_cg_iters) {
      res.stop = CgStop::max_iters;
      break;
    }

    // Restart the direction memory after a non-monotone step or a
    // projection onto the box: both invalidate the conjugacy.
    if (have_prev && (j > j_prev || clamped_last)) have_prev = false;
    j_prev = j;

    auto [d, beta] = cg_step(mesh, g, have_prev ? &g_prev : nullptr,
                             have_prev ? &d_prev : nullptr);
    double step;
    if (cfg.step_rule == StepRule::curvature_scaled) {
      const std::vector<Vec4> du =
          solve_forward_tangent(problem.params, u, eta, d);
      const double curvature =
          weighted_square_quadrature(mesh, du, problem.weight);
      step = -inner_product_cells(mesh, g, d) /
             (tik.gamma * inner_product_cells(mesh, d, d) + curvature);
    } else {
      step = step_size(mesh, g, d, tik.gamma);
    }

    CellField next(eta.size());
    for (std::size_t k = 0; k < next.size(); ++k)
      next[k] = eta[k] + step * d[k];
    const CellField unclamped = next;
    next = clamp01(std::move(next));
    clamped_last = next != unclamped;

    res.log.back().step = step;
    res.log.back().beta = beta;

    if (relative_change(mesh, eta, next) < cfg.stabilization_tol) {
      res.stop = CgStop::stabilized;
      break;
    }
    g_prev = g;
    d_prev = std::move(d);
    have_prev = true;
    eta = std::move(next);
  }
  return res;
}

std::vector<std::size_t> mark_cells(const ResidualField& r, double beta1) {
  if (r.empty()) throw std::invalid_argument("mark_cells: empty residual");
  double maxv = 0.0;
  for (double x : r) maxv = std::max(maxv, std::abs(x));
  std::vector<std::size_t> marked;
  if (maxv == 0.0) return marked;
  const double threshold = beta1 * maxv;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (std::abs(r[k]) >= threshold) marked.push_back(k);
  return marked;
}

AcgaResult run_acga(const InverseProblem& problem, const TikhonovConfig& tik,
                    const TimeMesh& initial_mesh, const CellField& eta_init,
                    const OptimizerConfig& cfg,
                    const std::function<double(double)>& truth,
                    const EstimateConstants& constants) {
  cfg.validate();
  AcgaResult out;
  TimeMesh mesh = initial_mesh;
  TikhonovConfig level_tik = tik;
  CellField eta = eta_init;
  double prev_rnorm = std::numeric_limits<double>::infinity();

  for (int level = 0;; ++level) {
    LevelResult lr{level, mesh, {}, level_tik.eta0, {}, {}, {}, 0.0, {}, {}};
    lr.cg = run_cga(problem, level_tik, mesh, eta, cfg);
    lr.eta = lr.cg.eta;
    lr.residual_norm = lr.cg.residual_norm;

    // residual field of the returned (best) iterate, for marking and
    // the a posteriori report
    const StateTrajectory u =
        solve_forward(problem.params, problem.u0, lr.eta, mesh, cfg.newton);
    const AdjointTrajectory lam = solve_adjoint(
        problem.params, u, lr.eta, problem.obs, problem.weight, cfg.newton);
    const ResidualField r =
        residual_field(u, lam, lr.eta, level_tik, problem.params);
    lr.residual = r;

    lr.estimates =
        make_estimate_report(r, lr.eta, mesh, level_tik.gamma, constants);
    if (truth) {
      CellField exact(mesh.cell_count());
      for (std::size_t k = 0; k < exact.size(); ++k)
        exact[k] = truth(mesh.cell_midpoint(k));
      lr.rel_error = relative_error(mesh, exact, lr.eta);
    }

    std::vector<std::size_t> marked = mark_cells(r, cfg.beta1);
    if (cfg.refine_neighbors && !marked.empty()) {
      std::vector<std::size_t> widened;
      for (std::size_t k : marked) {
        if (k > 0) widened.push_back(k - 1);
        widened.push_back(k);
        if (k + 1 < mesh.cell_count()) widened.push_back(k + 1);
      }
      std::sort(widened.begin(), widened.end());
      widened.erase(std::unique(widened.begin(), widened.end()),
                    widened.end());
      marked = std::move(widened);
    }
    lr.marked = marked;
    out.levels.push_back(std::move(lr));

    const double rnorm = out.levels.back().residual_norm;
    if (rnorm <= cfg.theta) break;
    if (level >= cfg.max_refinements) break;
    if (marked.empty()) break;
    // "increase or stabilize" versus the previous level
    if (level > 0 && rnorm >= prev_rnorm) break;
    prev_rnorm = rnorm;

    const TimeMesh child = mesh.refine(marked);
    eta = transfer_cell_field(mesh, out.levels.back().eta, child);
    level_tik.eta0 = transfer_cell_field(mesh, level_tik.eta0, child);
    mesh = child;
  }
  return out;
}

void write_iteration_log_csv(const IterationLog& log, std::ostream& out) {
  out << "m,J,grad_norm,residual_norm,step,beta\n";
  char buf[160];
  for (const IterationRecord& rec : log) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", rec.m,
                  rec.j_value, rec.grad_norm, rec.residual_norm, rec.step,
                  rec.beta);
    out << buf;
  }
}

void write_refinement_report_csv(const AcgaResult& result, std::ostream& out) {
  out << "level,cells,marked,residual_norm,e_eta,functional_bound,"
         "lipschitz_bound,residual_bound\n";
  char buf[256];
  for (const LevelResult& lr : result.levels) {
    std::string e_eta;
    if (lr.rel_error) {
      char tmp[32];
      std::snprintf(tmp, sizeof tmp, "%.10g", *lr.rel_error);
      e_eta = tmp;
    }
    std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.10g,%s,%.10g,%.10g,%.10g\n",
                  lr.level, lr.mesh.cell_count(), lr.marked.size(),
                  lr.residual_norm, e_eta.c_str(),
                  lr.estimates.functional_bound,
                  lr.estimates.minimizer_bound_lipschitz,
                  lr.estimates.minimizer_bound_residual);
    out << buf;
  }
}

}  // namespace hivpip
