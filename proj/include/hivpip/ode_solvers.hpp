// ode_solvers.hpp
//
// Implicit-Euler time stepping on a TimeMesh, solved per cell with
// Newton's method: forward in time for the state, backward in time for
// the adjoint. The adjoint system is linear in lambda, so its Newton
// iteration converges in one update; it goes through the same routine
// for uniformity.

#pragma once

#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "hivpip/hiv_model.hpp"
#include "hivpip/observation.hpp"
#include "hivpip/time_mesh.hpp"

namespace hivpip {

struct NewtonConfig {
  double tol = 1e-12;  // absolute inf-norm residual threshold
  int max_iter = 25;
};

class NewtonFailure : public std::runtime_error {
public:
  NewtonFailure(const std::string& what, Vec4 last_iterate,
                double residual_norm, long cell = -1)
      : std::runtime_error(what),
        last_iterate(last_iterate),
        residual_norm(residual_norm),
        cell(cell) {}

  Vec4 last_iterate;
  double residual_norm;
  long cell;  // offending mesh cell, -1 when not stepping
};

// Newton iteration x <- x - J(x)^{-1} F(x) until |F|_inf <= tol.
template <class Residual, class Jacobian>
Vec4 newton_solve_step(Residual&& residual_map, Jacobian&& jacobian_map,
                       Vec4 guess, const NewtonConfig& cfg = {}) {
  Vec4 x = guess;
  Vec4 f = residual_map(x);
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (inf_norm(f) <= cfg.tol) return x;
    const Vec4 dx = solve4(jacobian_map(x), f);
    x = x - dx;
    f = residual_map(x);
  }
  if (inf_norm(f) <= cfg.tol) return x;
  throw NewtonFailure("Newton iteration did not converge", x, inf_norm(f));
}

struct StateTrajectory {
  TimeMesh mesh;
  std::vector<StateVec> values;  // one per node; values[0] = u0
};

struct AdjointTrajectory {
  TimeMesh mesh;
  std::vector<AdjointVec> values;  // one per node; back() is exactly 0
};

StateTrajectory solve_forward(const ModelParams& p, const StateVec& u0,
                              const CellField& eta, const TimeMesh& mesh,
                              const NewtonConfig& cfg = {});

// Backward march with lambda(T) = 0. The data misfit enters as
// (u4 - g)(t_k) z(t_k) on nodes inside the observation window.
AdjointTrajectory solve_adjoint(const ModelParams& p, const StateTrajectory& u,
                                const CellField& eta,
                                const ObservationSet& obs,
                                const SmoothnessWeight& weight,
                                const NewtonConfig& cfg = {});

// Directional state sensitivity: the derivative of the discrete
// forward solution along a control perturbation d (per cell). Solves
// (I - tau_k J(u^{k+1})) du^{k+1} = du^k + tau_k f_eta(u^{k+1}) d_k
// with du^0 = 0, i.e. the exact linearization of each implicit step.
std::vector<Vec4> solve_forward_tangent(const ModelParams& p,
                                        const StateTrajectory& u,
                                        const CellField& eta,
                                        const CellField& direction);

// CSV rows "t,v1,v2,v3,v4", one per node.
void write_trajectory_csv(const TimeMesh& mesh, const std::vector<Vec4>& values,
                          const char* value_header, std::ostream& out);

}  // namespace hivpip
