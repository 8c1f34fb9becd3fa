#include "hivpip/objective.hpp"

#include <algorithm>
#include <cmath>

namespace hivpip {

namespace {

// Quadrature points: T1, T2 and every mesh node strictly inside. The
// weight vanishes at T1 and T2, so the endpoints mostly pin the range.
template <class Integrand>
double window_trapezoid(const TimeMesh& mesh, double t1, double t2,
                        Integrand&& f) {
  t2 = std::min(t2, mesh.t_end());
  if (!(t1 < t2)) return 0.0;
  std::vector<double> pts;
  pts.reserve(mesh.node_count() + 2);
  pts.push_back(t1);
  for (double t : mesh.nodes())
    if (t > t1 && t < t2) pts.push_back(t);
  pts.push_back(t2);
  double sum = 0.0;
  double prev = f(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double cur = f(pts[i]);
    sum += 0.5 * (prev + cur) * (pts[i] - pts[i - 1]);
    prev = cur;
  }
  return sum;
}

void check_cells(const CellField& v, const TimeMesh& mesh, const char* where) {
  if (v.size() != mesh.cell_count())
    throw std::invalid_argument(std::string(where) + ": field/mesh mismatch");
}

}  // namespace

double gamma_for_noise(double sigma, double mu, double floor) {
  if (!(sigma >= 0.0 && sigma <= 1.0))
    throw std::invalid_argument("gamma_for_noise: sigma must be in [0,1]");
  if (sigma == 0.0) return floor;
  return std::max(floor, std::pow(sigma, 2.0 * mu));
}

double data_misfit_quadrature(const TimeMesh& mesh,
                              std::span<const Vec4> u_nodes,
                              const ObservationSet& obs,
                              const SmoothnessWeight& weight) {
  if (u_nodes.size() != mesh.node_count())
    throw std::invalid_argument("data_misfit_quadrature: state/mesh mismatch");
  return window_trapezoid(mesh, obs.t1, obs.t2, [&](double t) {
    const double w = weight.at(t);
    if (w == 0.0) return 0.0;
    const double u4 = interpolate_nodal(mesh, u_nodes, t)[3];
    const double d = u4 - obs.value_at(t);
    return d * d * w;
  });
}

double weighted_square_quadrature(const TimeMesh& mesh,
                                  std::span<const Vec4> du_nodes,
                                  const SmoothnessWeight& weight) {
  if (du_nodes.size() != mesh.node_count())
    throw std::invalid_argument(
        "weighted_square_quadrature: field/mesh mismatch");
  return window_trapezoid(mesh, weight.t1, weight.t2, [&](double t) {
    const double w = weight.at(t);
    if (w == 0.0) return 0.0;
    const double du4 = interpolate_nodal(mesh, du_nodes, t)[3];
    return du4 * du4 * w;
  });
}

double tikhonov_value(const StateTrajectory& u, const ObservationSet& obs,
                      const SmoothnessWeight& weight, const TikhonovConfig& cfg,
                      const CellField& eta) {
  const TimeMesh& mesh = u.mesh;
  check_cells(eta, mesh, "tikhonov_value");
  check_cells(cfg.eta0, mesh, "tikhonov_value");
  const double data =
      0.5 * data_misfit_quadrature(mesh, u.values, obs, weight);
  double reg = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const double d = eta[k] - cfg.eta0[k];
    reg += mesh.width(k) * d * d;
  }
  return data + 0.5 * cfg.gamma * reg;
}

CellField gradient_nodal(const StateTrajectory& u, const AdjointTrajectory& lam,
                         const CellField& eta, const TikhonovConfig& cfg,
                         const ModelParams& p) {
  const TimeMesh& mesh = u.mesh;
  check_cells(eta, mesh, "gradient_nodal");
  check_cells(cfg.eta0, mesh, "gradient_nodal");
  if (lam.values.size() != mesh.node_count())
    throw std::invalid_argument("gradient_nodal: adjoint/mesh mismatch");
  CellField g(mesh.cell_count());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double u2_mid = 0.5 * (u.values[k][1] + u.values[k + 1][1]);
    const double l1_mid = 0.5 * (lam.values[k][0] + lam.values[k + 1][0]);
    const double l3_mid = 0.5 * (lam.values[k][2] + lam.values[k + 1][2]);
    g[k] = cfg.gamma * (eta[k] - cfg.eta0[k]) +
           p.alpha * u2_mid * (l3_mid - l1_mid);
  }
  return g;
}

ResidualField residual_field(const StateTrajectory& u,
                             const AdjointTrajectory& lam, const CellField& eta,
                             const TikhonovConfig& cfg, const ModelParams& p) {
  return gradient_nodal(u, lam, eta, cfg, p);
}

double l2_norm_cells(const TimeMesh& mesh, const CellField& v) {
  check_cells(v, mesh, "l2_norm_cells");
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += mesh.width(k) * v[k] * v[k];
  return std::sqrt(s);
}

double inner_product_cells(const TimeMesh& mesh, const CellField& a,
                           const CellField& b) {
  check_cells(a, mesh, "inner_product_cells");
  check_cells(b, mesh, "inner_product_cells");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += mesh.width(k) * a[k] * b[k];
  return s;
}

double relative_error(const TimeMesh& mesh, const CellField& eta_exact,
                      const CellField& eta_rec) {
  const double denom = l2_norm_cells(mesh, eta_exact);
  if (denom == 0.0)
    throw std::invalid_argument("relative_error: zero-norm reference");
  CellField diff(eta_exact.size());
  for (std::size_t k = 0; k < diff.size(); ++k)
    diff[k] = eta_exact[k] - eta_rec[k];
  return l2_norm_cells(mesh, diff) / denom;
}

void write_cell_field_csv(const TimeMesh& mesh, const CellField& v,
                          const char* value_header, std::ostream& out) {
  check_cells(v, mesh, "write_cell_field_csv");
  out << "t," << value_header << "\n";
  char buf[96];
  for (std::size_t k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", mesh.cell_midpoint(k),
                  v[k]);
    out << buf;
  }
}

}  // namespace hivpip
