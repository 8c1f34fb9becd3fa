// optimizer.hpp
//
// Conjugate-gradient minimization of the Tikhonov functional
// (Fletcher-Reeves update, box projection onto [0,1]) and the adaptive
// driver that re-runs it on locally refined time meshes, marking cells
// where the residual |R| comes within a fraction beta1 of its maximum.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>

#include "hivpip/error_estimates.hpp"
#include "hivpip/objective.hpp"

namespace hivpip {

// How the step size r^m is computed.
//  - regularization_only: r = -(G,d) / (gamma ||d||^2), the closed form
//    that ignores the data-term curvature.
//  - curvature_scaled: adds the linearized misfit curvature along d,
//    r = -(G,d) / (gamma ||d||^2 + int (du4)^2 z dt), using one tangent
//    solve per iteration. The closed form is recovered whenever the
//    data curvature is negligible. Default: with virus loads in the
//    thousands the closed form overshoots by orders of magnitude and
//    every iterate projects onto the box corners.
enum class StepRule { regularization_only, curvature_scaled };

struct OptimizerConfig {
  double theta = 1e-7;             // residual-norm stopping tolerance
  double beta1 = 0.1;              // refinement fraction in (0,1)
  int max_cg_iters = 50;
  int max_refinements = 6;
  double stabilization_tol = 1e-6; // relative eta-change threshold
  double growth_factor = 2.0;      // "abrupt growth" multiplier
  bool refine_neighbors = false;   // also mark cells adjacent to marked ones
  StepRule step_rule = StepRule::curvature_scaled;
  NewtonConfig newton;

  void validate() const;
};

enum class CgStop { tolerance, growth, stabilized, max_iters };

struct IterationRecord {
  int m;
  double j_value;
  double grad_norm;      // ||G||_{L2}
  double residual_norm;  // ||R||_{L2} (same number by construction)
  double step;           // r^m used to leave this iterate (0 on the last)
  double beta;           // beta^m of the CG update
  CellField eta;         // iterate snapshot
};

using IterationLog = std::vector<IterationRecord>;

struct CgResult {
  CellField eta;            // iterate with the smallest ||R|| seen
  double residual_norm;     // its ||R||
  IterationLog log;
  CgStop stop = CgStop::max_iters;
};

// Everything that stays fixed while eta is optimized.
struct InverseProblem {
  ModelParams params;
  StateVec u0 = kDefaultInitialState;
  ObservationSet obs;
  SmoothnessWeight weight;
};

// Fletcher-Reeves direction update: d = -G + beta d_prev with
// beta = ||G||^2 / ||G_prev||^2, reset to steepest descent on the first
// call, when the previous gradient vanishes, or when d fails to be a
// descent direction.
std::pair<CellField, double> cg_step(const TimeMesh& mesh,
                                     const CellField& g_now,
                                     const CellField* g_prev,
                                     const CellField* d_prev);

// r = -(G,d) / (gamma ||d||^2). Throws on a zero direction.
double step_size(const TimeMesh& mesh, const CellField& g, const CellField& d,
                 double gamma);

CgResult run_cga(const InverseProblem& problem, const TikhonovConfig& tik,
                 const TimeMesh& mesh, const CellField& eta_init,
                 const OptimizerConfig& cfg);

// { k : |R_k| >= beta1 * max_j |R_j| }; empty when R is identically 0.
std::vector<std::size_t> mark_cells(const ResidualField& r, double beta1);

struct LevelResult {
  int level = 0;
  TimeMesh mesh;
  CellField eta;                   // best iterate on this level
  CellField eta0;                  // transferred initial guess
  CgResult cg;
  ResidualField residual;          // residual field of the best iterate
  std::vector<std::size_t> marked; // cells flagged for the next level
  double residual_norm = 0.0;
  std::optional<double> rel_error; // vs sampled truth, when truth known
  EstimateReport estimates;
};

struct AcgaResult {
  std::vector<LevelResult> levels;
  const LevelResult& final_level() const { return levels.back(); }
};

// Runs CGA per level, refines where |R| peaks, transfers eta and eta0
// to the child mesh by piecewise-constant injection, and stops when the
// level residual fails to decrease, the marked set is empty, theta is
// reached, or max_refinements is exhausted. `truth`, when given, is the
// exact control used only for per-level error reporting.
AcgaResult run_acga(const InverseProblem& problem, const TikhonovConfig& tik,
                    const TimeMesh& initial_mesh, const CellField& eta_init,
                    const OptimizerConfig& cfg,
                    const std::function<double(double)>& truth = {},
                    const EstimateConstants& constants = {});

// One row per iteration: m,J,grad_norm,residual_norm,step,beta.
void write_iteration_log_csv(const IterationLog& log, std::ostream& out);

// One row per level: level,cells,marked,residual_norm,e_eta,bounds.
void write_refinement_report_csv(const AcgaResult& result, std::ostream& out);

}  // namespace hivpip
