// objective.hpp
//
// The Tikhonov functional
//   J(eta) = 1/2 int_{T1}^{T2} (u4 - g)^2 z dt + gamma/2 int_0^T (eta - eta0)^2 dt,
// its cellwise gradient/residual
//   G_k = gamma (eta_k - eta0_k) + alpha u2(t) (lambda3 - lambda1)(t)
// with node fields taken at cell midpoints, and the L2 cell norms used
// throughout the optimizer and the error estimates.

#pragma once

#include <span>

#include "hivpip/ode_solvers.hpp"

namespace hivpip {

struct TikhonovConfig {
  double gamma = 1.0;   // regularization weight, > 0
  CellField eta0;       // initial guess, per cell of the working mesh
};

// Same formula as the gradient; kept as its own name because it drives
// the stopping rules and the mesh refinement.
using ResidualField = CellField;

// gamma(sigma) = sigma^(2 mu); a floor applies at sigma = 0 where the
// power rule degenerates.
double gamma_for_noise(double sigma, double mu = 0.15, double floor = 1e-8);

double tikhonov_value(const StateTrajectory& u, const ObservationSet& obs,
                      const SmoothnessWeight& weight, const TikhonovConfig& cfg,
                      const CellField& eta);

CellField gradient_nodal(const StateTrajectory& u, const AdjointTrajectory& lam,
                         const CellField& eta, const TikhonovConfig& cfg,
                         const ModelParams& p);

ResidualField residual_field(const StateTrajectory& u,
                             const AdjointTrajectory& lam, const CellField& eta,
                             const TikhonovConfig& cfg, const ModelParams& p);

// sqrt(sum_k tau_k v_k^2)
double l2_norm_cells(const TimeMesh& mesh, const CellField& v);

// sum_k tau_k a_k b_k
double inner_product_cells(const TimeMesh& mesh, const CellField& a,
                           const CellField& b);

// ||truth - rec|| / ||truth||, both piecewise constant on the mesh.
double relative_error(const TimeMesh& mesh, const CellField& eta_exact,
                      const CellField& eta_rec);

// Trapezoidal quadrature of (u4 - g)^2 z over the observation window,
// on mesh nodes restricted to [T1,T2] plus the window endpoints.
// Returns the integral (without the 1/2).
double data_misfit_quadrature(const TimeMesh& mesh,
                              std::span<const Vec4> u_nodes,
                              const ObservationSet& obs,
                              const SmoothnessWeight& weight);

// Same quadrature applied to du4^2 z for a tangent field; used by the
// curvature-scaled step size.
double weighted_square_quadrature(const TimeMesh& mesh,
                                  std::span<const Vec4> du_nodes,
                                  const SmoothnessWeight& weight);

// CSV rows "t,value" at cell midpoints, for plotting residual and
// gradient fields.
void write_cell_field_csv(const TimeMesh& mesh, const CellField& v,
                          const char* value_header, std::ostream& out);

}  // namespace hivpip
