#include "hivpip/ode_solvers.hpp"

namespace hivpip {

namespace {

void check_field(const CellField& eta, const TimeMesh& mesh,
                 const char* where) {
  if (eta.size() != mesh.cell_count())
    throw std::invalid_argument(std::string(where) +
                                ": control field does not live on the mesh");
}

// Residual tolerance scaled to the local magnitude of the step; an
// absolute 1e-12 is unreachable in doubles once |tau f| reaches 1e4.
NewtonConfig scaled(const NewtonConfig& cfg, double magnitude) {
  NewtonConfig c = cfg;
  c.tol = cfg.tol * (1.0 + magnitude);
  return c;
}

// One implicit-Euler cell: solves x - tau f(x, eta) = u_prev. The
// implicit system is bilinear in (u1, u4) and on coarse cells Newton
// from the warm start can land on its spurious branch with negative
// populations; when that happens the step is re-solved by continuation
// in the cell width, which follows the branch connected to u_prev.
StateVec implicit_euler_cell(const ModelParams& p, const StateVec& u_prev,
                             double tau, double eta,
                             const NewtonConfig& cfg) {
  auto solve_fraction = [&](const StateVec& guess, double s) {
    const double stau = s * tau;
    auto residual = [&](const Vec4& x) {
      return x - (stau * forward_rhs(p, x, eta)) - u_prev;
    };
    auto jacobian = [&](const Vec4& x) {
      return identity_plus_scaled(forward_jacobian(p, x, eta), -stau);
    };
    return newton_solve_step(residual, jacobian, guess,
                             scaled(cfg, inf_norm(u_prev)));
  };

  try {
    const StateVec x = solve_fraction(u_prev, 1.0);
    if (*std::min_element(x.begin(), x.end()) >= 0.0) return x;
  } catch (const NewtonFailure&) {
    // fall through to continuation
  }
  NewtonFailure last("unreachable", u_prev, 0.0);
  for (int stages = 2; stages <= 256; stages *= 2) {
    try {
      StateVec x = u_prev;
      for (int j = 1; j <= stages; ++j)
        x = solve_fraction(x, static_cast<double>(j) / stages);
      return x;
    } catch (const NewtonFailure& e) {
      last = e;
    }
  }
  throw last;
}

}  // namespace

StateTrajectory solve_forward(const ModelParams& p, const StateVec& u0,
                              const CellField& eta, const TimeMesh& mesh,
                              const NewtonConfig& cfg) {
  check_field(eta, mesh, "solve_forward");
  StateTrajectory traj{mesh, std::vector<StateVec>(mesh.node_count())};
  traj.values[0] = u0;
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    try {
      traj.values[k + 1] =
          implicit_euler_cell(p, traj.values[k], mesh.width(k), eta[k], cfg);
    } catch (const NewtonFailure& e) {
      throw NewtonFailure("solve_forward: Newton failed on cell " +
                              std::to_string(k),
                          e.last_iterate, e.residual_norm,
                          static_cast<long>(k));
    }
  }
  return traj;
}

AdjointTrajectory solve_adjoint(const ModelParams& p, const StateTrajectory& u,
                                const CellField& eta,
                                const ObservationSet& obs,
                                const SmoothnessWeight& weight,
                                const NewtonConfig& cfg) {
  const TimeMesh& mesh = u.mesh;
  check_field(eta, mesh, "solve_adjoint");
  if (u.values.size() != mesh.node_count())
    throw std::invalid_argument("solve_adjoint: state does not live on mesh");

  AdjointTrajectory traj{mesh, std::vector<AdjointVec>(mesh.node_count())};
  traj.values.back() = AdjointVec{};  // lambda(T) = 0

  const bool have_data = !obs.times.empty();
  for (std::size_t k = mesh.cell_count(); k-- > 0;) {
    const double tau = mesh.width(k);
    const double t_k = mesh.node(k);
    const double eta_k = eta[k];
    const StateVec& u_k = u.values[k];
    double mismatch = 0.0;
    if (have_data && t_k >= obs.t1 && t_k <= obs.t2) {
      const double w = weight.at(t_k);
      if (w != 0.0) mismatch = (u_k[3] - obs.value_at(t_k)) * w;
    }
    const AdjointVec& next = traj.values[k + 1];
    auto residual = [&](const Vec4& x) {
      return x + (tau * adjoint_rhs(p, x, u_k, eta_k, mismatch)) - next;
    };
    auto jacobian = [&](const Vec4&) {
      return identity_plus_scaled(adjoint_jacobian(p, u_k, eta_k), tau);
    };
    try {
      traj.values[k] = newton_solve_step(
          residual, jacobian, next,
          scaled(cfg, inf_norm(next) + tau * std::abs(mismatch)));
    } catch (const NewtonFailure& e) {
      throw NewtonFailure("solve_adjoint: Newton failed on cell " +
                              std::to_string(k),
                          e.last_iterate, e.residual_norm,
                          static_cast<long>(k));
    }
  }
  return traj;
}

std::vector<Vec4> solve_forward_tangent(const ModelParams& p,
                                        const StateTrajectory& u,
                                        const CellField& eta,
                                        const CellField& direction) {
  const TimeMesh& mesh = u.mesh;
  check_field(eta, mesh, "solve_forward_tangent");
  check_field(direction, mesh, "solve_forward_tangent");
  std::vector<Vec4> du(mesh.node_count(), Vec4{});
  for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
    const double tau = mesh.width(k);
    const StateVec& u_next = u.values[k + 1];
    const Mat4 a =
        identity_plus_scaled(forward_jacobian(p, u_next, eta[k]), -tau);
    const Vec4 rhs =
        du[k] + (tau * direction[k]) * control_sensitivity(p, u_next);
    du[k + 1] = solve4(a, rhs);
  }
  return du;
}

void write_trajectory_csv(const TimeMesh& mesh, const std::vector<Vec4>& values,
                          const char* value_header, std::ostream& out) {
  out << "t," << value_header << "\n";
  char buf[192];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  mesh.node(i), values[i][0], values[i][1], values[i][2],
                  values[i][3]);
    out << buf;
  }
}

}  // namespace hivpip
