// observation.hpp
//
// Discrete virus-load observations g(t_i) on a window [T1,T2] and the
// smoothness weight z_zeta that tapers the data misfit to zero at the
// window boundary.

#pragma once

#include <stdexcept>
#include <vector>

namespace hivpip {

struct ObservationSet {
  std::vector<double> times;   // strictly increasing, inside [t1, t2]
  std::vector<double> values;  // virus load g(t_i)
  double t1 = 0.0;             // window start [days]
  double t2 = 0.0;             // window end [days]

  void validate() const;

  // Piecewise-linear value at t for t within [t1,t2]; constant
  // extension past the first/last sample. Observations stay pinned to
  // the mesh they were taken on, so refined meshes read them through
  // this interpolant.
  double value_at(double t) const;
};

struct SmoothnessWeight {
  double t1 = 0.0;
  double t2 = 0.0;
  double zeta = 0.05;  // relative rolloff width, in (0,1)

  // 0 outside [t1,t2]; 1 on the plateau [t1+rho, t2-rho] with
  // rho = zeta (t2-t1)/2; cubic smoothstep in between.
  double at(double t) const;

  void validate() const;
};

}  // namespace hivpip
