// error_estimates.hpp
//
// A posteriori bounds computed from the residual, the mesh function tau
// and the computed control. The constants are not computable from the
// problem data; the defaults of 1 make the bounds relative refinement
// indicators rather than certified error bars.

#pragma once

#include "hivpip/objective.hpp"

namespace hivpip {

struct EstimateConstants {
  double ci_times_c = 1.0;  // C_I * C, functional bound
  double d = 1.0;           // Lipschitz constant of J'
  double ci = 1.0;          // interpolation constant
};

struct EstimateReport {
  double functional_bound = 0.0;
  double minimizer_bound_lipschitz = 0.0;
  double minimizer_bound_residual = 0.0;
  EstimateConstants constants;  // flagged as nominal in reports
};

// C_I C ||J'|| ||tau eta||, with (tau eta)_k = tau_k eta_k.
double functional_error_bound(const CellField& jprime, const CellField& eta,
                              const TimeMesh& mesh, double ci_times_c);

// (D / gamma) C_I ||tau eta||.
double minimizer_bound_lipschitz(const CellField& eta, const TimeMesh& mesh,
                                 double d, double ci, double gamma);

// sqrt( (||R|| / gamma) C_I ||tau eta|| ).
double minimizer_bound_residual(const ResidualField& r, const CellField& eta,
                                const TimeMesh& mesh, double ci, double gamma);

EstimateReport make_estimate_report(const ResidualField& r,
                                    const CellField& eta, const TimeMesh& mesh,
                                    double gamma,
                                    const EstimateConstants& constants = {});

}  // namespace hivpip
