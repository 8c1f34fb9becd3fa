#include "hivpip/error_estimates.hpp"

#include <cmath>

namespace hivpip {

namespace {

double tau_eta_norm(const CellField& eta, const TimeMesh& mesh) {
  CellField scaled(eta.size());
  for (std::size_t k = 0; k < eta.size(); ++k)
    scaled[k] = mesh.width(k) * eta[k];
  return l2_norm_cells(mesh, scaled);
}

}  // namespace

double functional_error_bound(const CellField& jprime, const CellField& eta,
                              const TimeMesh& mesh, double ci_times_c) {
  if (!(ci_times_c > 0.0))
    throw std::invalid_argument("functional_error_bound: constant must be > 0");
  return ci_times_c * l2_norm_cells(mesh, jprime) * tau_eta_norm(eta, mesh);
}

double minimizer_bound_lipschitz(const CellField& eta, const TimeMesh& mesh,
                                 double d, double ci, double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("minimizer_bound_lipschitz: gamma must be > 0");
  if (!(d > 0.0) || !(ci > 0.0))
    throw std::invalid_argument(
        "minimizer_bound_lipschitz: constants must be > 0");
  return d / gamma * ci * tau_eta_norm(eta, mesh);
}

double minimizer_bound_residual(const ResidualField& r, const CellField& eta,
                                const TimeMesh& mesh, double ci, double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("minimizer_bound_residual: gamma must be > 0");
  return std::sqrt(l2_norm_cells(mesh, r) / gamma * ci *
                   tau_eta_norm(eta, mesh));
}

EstimateReport make_estimate_report(const ResidualField& r,
                                    const CellField& eta, const TimeMesh& mesh,
                                    double gamma,
                                    const EstimateConstants& constants) {
  EstimateReport rep;
  rep.constants = constants;
  rep.functional_bound =
      functional_error_bound(r, eta, mesh, constants.ci_times_c);
  rep.minimizer_bound_lipschitz =
      minimizer_bound_lipschitz(eta, mesh, constants.d, constants.ci, gamma);
  rep.minimizer_bound_residual =
      minimizer_bound_residual(r, eta, mesh, constants.ci, gamma);
  return rep;
}

}  // namespace hivpip
