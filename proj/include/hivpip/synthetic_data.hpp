// synthetic_data.hpp
//
// Ground-truth controls, clean trajectories solved on a fine mesh,
// multiplicative uniform noise on the sampled virus load, and the
// data-driven initial guess for eta obtained from the third state
// equation plus a least-squares polynomial fit.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <variant>

#include "hivpip/ode_solvers.hpp"

namespace hivpip {

class TruthSpec {
public:
  static TruthSpec exp_decay(double amplitude, double rate, double offset);
  static TruthSpec constant(double level);
  // Piecewise-linear table; must cover the queried times.
  static TruthSpec table(std::vector<double> times, std::vector<double> values);

  // eta(t), clamped to [0,1].
  double at(double t) const;

private:
  struct ExpDecay {
    double amplitude, rate, offset;
  };
  struct Constant {
    double level;
  };
  struct Table {
    std::vector<double> times, values;
  };
  std::variant<ExpDecay, Constant, Table> shape_;
};

struct NoiseSpec {
  double sigma = 0.0;      // relative noise level in [0,1]
  std::uint64_t seed = 0;
};

struct ObservationLayout {
  double t1 = 0.0;
  double t2 = 0.0;
  std::size_t n_points = 0;  // equidistant in [t1, t2], endpoints included

  void validate() const;
};

// Truth sampled at cell midpoints.
CellField sample_truth(const TruthSpec& spec, const TimeMesh& mesh);

struct SyntheticData {
  ObservationSet clean;            // u4 at the layout points
  StateTrajectory fine_trajectory; // full clean solve, for u2/u3 sampling
};

// Solves the forward problem with the exact control on `fine_mesh` and
// samples the virus load at the layout points. The fine mesh should be
// substantially finer than the inversion mesh so that the data do not
// inherit the inversion discretization.
SyntheticData generate_observations(const ModelParams& p, const StateVec& u0,
                                    const TruthSpec& truth,
                                    const ObservationLayout& layout,
                                    const TimeMesh& fine_mesh);

// v -> v (1 + sigma a) with a the uniform [-1,1] draw.
inline double noisy_value(double v, double sigma, double a) {
  return v * (1.0 + sigma * a);
}

// Uniform draw on [-1,1] with a platform-independent mapping from the
// raw 64-bit stream.
double uniform_pm1(std::mt19937_64& rng);

ObservationSet add_noise(const ObservationSet& obs, const NoiseSpec& noise);

std::vector<double> add_noise_values(const std::vector<double>& values,
                                     const NoiseSpec& noise);

// Component comp of a trajectory, piecewise-linearly sampled at `times`.
std::vector<double> sample_component(const StateTrajectory& traj, int comp,
                                     std::span<const double> times);

// Initial guess from noisy u2, u3 at the nodes of the inversion mesh:
// raw per-cell values of 1 - ((u3^{k+1}-u3^k)/tau_k + delta u3^k) /
// (alpha u2^k), smoothed by a degree-`fit_degree` polynomial fit at
// cell midpoints and clamped to [0,1].
CellField initial_guess_eta0(std::span<const double> u2_nodes,
                             std::span<const double> u3_nodes,
                             const ModelParams& p, const TimeMesh& mesh,
                             int fit_degree = 3);

void write_observations_csv(const ObservationSet& obs, std::ostream& out);
ObservationSet read_observations_csv(std::istream& in, double t1, double t2);

// Sidecar metadata for an observation file: sigma, seed, window, layout
// and truth description, as JSON.
void write_observation_metadata(const ObservationLayout& layout,
                                const NoiseSpec& noise,
                                const std::string& truth_desc,
                                const std::filesystem::path& path);

}  // namespace hivpip
