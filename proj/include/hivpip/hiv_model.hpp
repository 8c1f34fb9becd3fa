// hiv_model.hpp
//
// Four-state HIV infection dynamics under a reverse-transcriptase
// inhibitor with time-dependent efficacy eta(t) in [0,1]:
//
//   u1' = s - k u1 u4 - mu u1 + (eta alpha + b) u2     uninfected cells
//   u2' = k u1 u4 - (mu1 + alpha + b) u2               pre-RT infected
//   u3' = (1 - eta) alpha u2 - delta u3                post-RT infected
//   u4' = N delta u3 - c u4                            free virus
//
// plus the backward-in-time adjoint system used for the objective
// gradient. Jacobians are hand-coded analytic 4x4 matrices; tests
// validate them against central finite differences.

#pragma once

#include "hivpip/linalg.hpp"

namespace hivpip {

using StateVec = Vec4;    // (u1, u2, u3, u4)
using AdjointVec = Vec4;  // (lambda1 .. lambda4)

struct ModelParams {
  double s = 10.0;       // inflow rate of T cells [mm^-3 day^-1]
  double mu = 0.01;      // natural death rate of T cells [day^-1]
  double k = 2.4e-5;     // infection rate [mm^3 day^-1]
  double mu1 = 0.015;    // death rate of infected cells [day^-1]
  double alpha = 0.4;    // pre-RT -> post-RT transition rate [day^-1]
  double b = 0.05;       // reverting rate to uninfected class [day^-1]
  double delta = 0.26;   // death rate of actively infected cells [day^-1]
  double c = 2.4;        // virus clearance rate [day^-1]
  double N = 1000.0;     // virions produced per infected cell

  void validate() const;
};

inline constexpr StateVec kDefaultInitialState{300.0, 10.0, 10.0, 10.0};

StateVec forward_rhs(const ModelParams& p, const StateVec& u, double eta);

// (i,j) entry is d(forward_rhs_i)/d(u_j).
Mat4 forward_jacobian(const ModelParams& p, const StateVec& u, double eta);

// d(forward_rhs)/d(eta) = (alpha u2, 0, -alpha u2, 0); the forward RHS
// is affine in eta.
Vec4 control_sensitivity(const ModelParams& p, const StateVec& u);

// Right-hand side of the adjoint system (d lambda / dt). `mismatch` is
// the weighted data misfit (u4 - g) z_zeta at the evaluation time,
// already zeroed outside the observation window by the caller.
AdjointVec adjoint_rhs(const ModelParams& p, const AdjointVec& lam,
                       const StateVec& u, double eta, double mismatch);

// d(adjoint_rhs_i)/d(lambda_j); independent of lambda and equal to the
// negative transpose of forward_jacobian.
Mat4 adjoint_jacobian(const ModelParams& p, const StateVec& u, double eta);

}  // namespace hivpip
