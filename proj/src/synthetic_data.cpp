#include "hivpip/synthetic_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hivpip {

TruthSpec TruthSpec::exp_decay(double amplitude, double rate, double offset) {
  TruthSpec s;
  s.shape_ = ExpDecay{amplitude, rate, offset};
  return s;
}

TruthSpec TruthSpec::constant(double level) {
  TruthSpec s;
  s.shape_ = Constant{level};
  return s;
}

TruthSpec TruthSpec::table(std::vector<double> times,
                           std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("TruthSpec::table: need >= 2 samples");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("TruthSpec::table: times must increase");
  TruthSpec s;
  s.shape_ = Table{std::move(times), std::move(values)};
  return s;
}

double TruthSpec::at(double t) const {
  double v;
  if (const auto* e = std::get_if<ExpDecay>(&shape_)) {
    v = e->amplitude * std::exp(-e->rate * t) + e->offset;
  } else if (const auto* c = std::get_if<Constant>(&shape_)) {
    v = c->level;
  } else {
    const auto& tab = std::get<Table>(shape_);
    if (t < tab.times.front() || t > tab.times.back())
      throw std::invalid_argument("TruthSpec: t outside the table range");
    auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
    if (it == tab.times.end()) return std::clamp(tab.values.back(), 0.0, 1.0);
    const std::size_t i = static_cast<std::size_t>(it - tab.times.begin());
    const double w = (t - tab.times[i - 1]) / (tab.times[i] - tab.times[i - 1]);
    v = (1.0 - w) * tab.values[i - 1] + w * tab.values[i];
  }
  return std::clamp(v, 0.0, 1.0);
}

void ObservationLayout::validate() const {
  if (!(0.0 <= t1 && t1 < t2))
    throw std::invalid_argument("ObservationLayout: need 0 <= T1 < T2");
  if (n_points < 2)
    throw std::invalid_argument("ObservationLayout: need >= 2 points");
}

CellField sample_truth(const TruthSpec& spec, const TimeMesh& mesh) {
  CellField v(mesh.cell_count());
  for (std::size_t k = 0; k < v.size(); ++k)
    v[k] = spec.at(mesh.cell_midpoint(k));
  return v;
}

SyntheticData generate_observations(const ModelParams& p, const StateVec& u0,
                                    const TruthSpec& truth,
                                    const ObservationLayout& layout,
                                    const TimeMesh& fine_mesh) {
  layout.validate();
  if (layout.t2 > fine_mesh.t_end() + 1e-9)
    throw std::invalid_argument(
        "generate_observations: window ends beyond the mesh");

  const CellField eta_exact = sample_truth(truth, fine_mesh);
  StateTrajectory traj = solve_forward(p, u0, eta_exact, fine_mesh);

  ObservationSet obs;
  obs.t1 = layout.t1;
  obs.t2 = layout.t2;
  obs.times.resize(layout.n_points);
  const double step =
      (layout.t2 - layout.t1) / static_cast<double>(layout.n_points - 1);
  for (std::size_t i = 0; i < layout.n_points; ++i)
    obs.times[i] = layout.t1 + step * static_cast<double>(i);
  obs.times.back() = layout.t2;
  obs.values = sample_component(traj, 3, obs.times);
  obs.validate();
  return {std::move(obs), std::move(traj)};
}

double uniform_pm1(std::mt19937_64& rng) {
  // 53 random bits -> [0,1) -> [-1,1); bit-stable across platforms
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

ObservationSet add_noise(const ObservationSet& obs, const NoiseSpec& noise) {
  ObservationSet out = obs;
  out.values = add_noise_values(obs.values, noise);
  return out;
}

std::vector<double> add_noise_values(const std::vector<double>& values,
                                     const NoiseSpec& noise) {
  if (!(noise.sigma >= 0.0 && noise.sigma <= 1.0))
    throw std::invalid_argument("add_noise: sigma must be in [0,1]");
  std::mt19937_64 rng(noise.seed);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = noisy_value(values[i], noise.sigma, uniform_pm1(rng));
  return out;
}

std::vector<double> sample_component(const StateTrajectory& traj, int comp,
                                     std::span<const double> times) {
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    out[i] = interpolate_nodal(traj.mesh, std::span<const Vec4>(traj.values),
                               times[i])[comp];
  return out;
}

namespace {

// Least-squares polynomial fit on times rescaled to [-1,1], evaluated
// back at the same abscissae.
std::vector<double> polyfit_eval(const std::vector<double>& t,
                                 const std::vector<double>& y, int degree) {
  const std::size_t n = t.size();
  const std::size_t m = static_cast<std::size_t>(degree) + 1;
  const double t_lo = t.front(), t_hi = t.back();
  const double mid = 0.5 * (t_lo + t_hi);
  const double half = std::max(0.5 * (t_hi - t_lo), 1e-30);

  std::vector<double> powers(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (t[i] - mid) / half;
    double p = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      powers[i * m + j] = p;
      p *= s;
    }
  }
  // normal equations A^T A c = A^T y
  std::vector<double> ata(m * m, 0.0), aty(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < m; ++r) {
      aty[r] += powers[i * m + r] * y[i];
      for (std::size_t c = 0; c < m; ++c)
        ata[r * m + c] += powers[i * m + r] * powers[i * m + c];
    }
  }
  const std::vector<double> coef = solve_dense(std::move(ata), std::move(aty), m);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += coef[j] * powers[i * m + j];
  return out;
}

}  // namespace

CellField initial_guess_eta0(std::span<const double> u2_nodes,
                             std::span<const double> u3_nodes,
                             const ModelParams& p, const TimeMesh& mesh,
                             int fit_degree) {
  if (u2_nodes.size() != mesh.node_count() ||
      u3_nodes.size() != mesh.node_count())
    throw std::invalid_argument("initial_guess_eta0: samples/mesh mismatch");
  if (fit_degree < 0 || fit_degree > 6)
    throw std::invalid_argument("initial_guess_eta0: fit degree must be 0..6");

  const std::size_t n = mesh.cell_count();
  if (fit_degree >= static_cast<int>(n))
    throw std::invalid_argument(
        "initial_guess_eta0: fit degree exceeds cell count");

  std::vector<double> mids(n), raw(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(u2_nodes[k] > 0.0))
      throw std::invalid_argument(
          "initial_guess_eta0: nonpositive u2 sample (degenerate data)");
    const double du3 = (u3_nodes[k + 1] - u3_nodes[k]) / mesh.width(k);
    raw[k] = 1.0 - (du3 + p.delta * u3_nodes[k]) / (p.alpha * u2_nodes[k]);
    mids[k] = mesh.cell_midpoint(k);
  }
  std::vector<double> fitted = polyfit_eval(mids, raw, fit_degree);
  CellField eta0(n);
  for (std::size_t k = 0; k < n; ++k) eta0[k] = std::clamp(fitted[k], 0.0, 1.0);
  return eta0;
}

void write_observations_csv(const ObservationSet& obs, std::ostream& out) {
  out << "t,g\n";
  char buf[80];
  for (std::size_t i = 0; i < obs.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", obs.times[i],
                  obs.values[i]);
    out << buf;
  }
}

ObservationSet read_observations_csv(std::istream& in, double t1, double t2) {
  ObservationSet obs;
  obs.t1 = t1;
  obs.t2 = t2;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("t,", 0) == 0) continue;  // header
    }
    std::istringstream ss(line);
    double t, g;
    char comma;
    if (!(ss >> t >> comma >> g) || comma != ',')
      throw std::invalid_argument("read_observations_csv: bad row: " + line);
    obs.times.push_back(t);
    obs.values.push_back(g);
  }
  obs.validate();
  return obs;
}

void write_observation_metadata(const ObservationLayout& layout,
                                const NoiseSpec& noise,
                                const std::string& truth_desc,
                                const std::filesystem::path& path) {
  nlohmann::json j;
  j["t1"] = layout.t1;
  j["t2"] = layout.t2;
  j["n_points"] = layout.n_points;
  j["sigma"] = noise.sigma;
  j["seed"] = noise.seed;
  j["truth"] = truth_desc;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace hivpip
