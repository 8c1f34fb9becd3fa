#include "hivpip/hiv_model.hpp"

#include <stdexcept>

namespace hivpip {

void ModelParams::validate() const {
  const double vals[] = {s, mu, k, mu1, alpha, b, delta, c, N};
  for (double v : vals)
    if (!(v > 0.0))
      throw std::invalid_argument("ModelParams: all rates must be positive");
}

StateVec forward_rhs(const ModelParams& p, const StateVec& u, double eta) {
  const double u1 = u[0], u2 = u[1], u3 = u[2], u4 = u[3];
  return {
      p.s - p.k * u1 * u4 - p.mu * u1 + (eta * p.alpha + p.b) * u2,
      p.k * u1 * u4 - (p.mu1 + p.alpha + p.b) * u2,
      (1.0 - eta) * p.alpha * u2 - p.delta * u3,
      p.N * p.delta * u3 - p.c * u4,
  };
}

Mat4 forward_jacobian(const ModelParams& p, const StateVec& u, double eta) {
  const double u1 = u[0], u4 = u[3];
  Mat4 j{};
  j[0] = {-p.k * u4 - p.mu, eta * p.alpha + p.b, 0.0, -p.k * u1};
  j[1] = {p.k * u4, -(p.mu1 + p.alpha + p.b), 0.0, p.k * u1};
  j[2] = {0.0, (1.0 - eta) * p.alpha, -p.delta, 0.0};
  j[3] = {0.0, 0.0, p.N * p.delta, -p.c};
  return j;
}

Vec4 control_sensitivity(const ModelParams& p, const StateVec& u) {
  const double au2 = p.alpha * u[1];
  return {au2, 0.0, -au2, 0.0};
}

AdjointVec adjoint_rhs(const ModelParams& p, const AdjointVec& lam,
                       const StateVec& u, double eta, double mismatch) {
  const double l1 = lam[0], l2 = lam[1], l3 = lam[2], l4 = lam[3];
  const double u1 = u[0], u4 = u[3];
  return {
      l1 * p.k * u4 + l1 * p.mu - l2 * p.k * u4,
      l2 * (p.mu1 + p.alpha + p.b) - l1 * (eta * p.alpha + p.b) -
          (1.0 - eta) * p.alpha * l3,
      l3 * p.delta - l4 * p.N * p.delta,
      l4 * p.c + l1 * p.k * u1 - l2 * p.k * u1 + mismatch,
  };
}

Mat4 adjoint_jacobian(const ModelParams& p, const StateVec& u, double eta) {
  const double u1 = u[0], u4 = u[3];
  Mat4 j{};
  j[0] = {p.k * u4 + p.mu, -p.k * u4, 0.0, 0.0};
  j[1] = {-(eta * p.alpha + p.b), p.mu1 + p.alpha + p.b,
          -(1.0 - eta) * p.alpha, 0.0};
  j[2] = {0.0, 0.0, p.delta, -p.N * p.delta};
  j[3] = {p.k * u1, -p.k * u1, 0.0, p.c};
  return j;
}

}  // namespace hivpip
