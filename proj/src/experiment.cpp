#include "hivpip/experiment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace hivpip {

namespace {

constexpr std::uint32_t kStreamU4 = 1;
constexpr std::uint32_t kStreamU2 = 2;
constexpr std::uint32_t kStreamU3 = 3;

void fnv_mix(std::uint64_t& h, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xff;
    h *= 0x100000001b3ull;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string run_dir_name(double t1, double sigma, int rep) {
  std::ostringstream ss;
  ss << "t1_" << format_double(t1) << "_sigma_" << format_double(sigma)
     << "_seed" << rep;
  return ss.str();
}

void write_scenario_artifacts(const ExperimentConfig& cfg,
                              const ScenarioResult& sr,
                              const std::filesystem::path& dir, double t1,
                              double sigma, int rep) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "observations.csv");
    write_observations_csv(sr.noisy_obs, out);
    ObservationLayout layout{t1, cfg.t2, cfg.n_obs};
    NoiseSpec noise{sigma, derive_seed(cfg.base_seed, t1, sigma, rep, kStreamU4)};
    write_observation_metadata(layout, noise, cfg.truth_desc,
                               dir / "observations.meta.json");
  }
  {
    std::ofstream out(dir / "eta0.csv");
    write_cell_field_csv(sr.mesh, sr.eta0, "eta0", out);
  }
  {
    std::ofstream out(dir / "refinement_report.csv");
    write_refinement_report_csv(sr.acga, out);
  }
  for (const LevelResult& lr : sr.acga.levels) {
    const std::string tag = "level" + std::to_string(lr.level);
    {
      std::ofstream out(dir / ("eta_" + tag + ".csv"));
      write_cell_field_csv(lr.mesh, lr.eta, "eta", out);
    }
    {
      std::ofstream out(dir / ("residual_" + tag + ".csv"));
      write_cell_field_csv(lr.mesh, lr.residual, "residual", out);
    }
    {
      std::ofstream out(dir / ("iterations_" + tag + ".csv"));
      write_iteration_log_csv(lr.cg.log, out);
    }
    {
      std::ofstream out(dir / ("mesh_" + tag + ".txt"));
      write_mesh(lr.mesh, out);
    }
    {
      const StateTrajectory u =
          solve_forward(cfg.params, cfg.u0, lr.eta, lr.mesh, cfg.opt.newton);
      std::ofstream out(dir / ("state_" + tag + ".csv"));
      write_trajectory_csv(lr.mesh, u.values, "u1,u2,u3,u4", out);
    }
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, double t1, double sigma, int rep,
                          std::uint32_t stream) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  fnv_mix(h, base);
  fnv_mix(h, std::bit_cast<std::uint64_t>(t1));
  fnv_mix(h, std::bit_cast<std::uint64_t>(sigma));
  fnv_mix(h, static_cast<std::uint64_t>(rep));
  fnv_mix(h, static_cast<std::uint64_t>(stream));
  return h;
}

ExperimentConfig ExperimentConfig::for_test(Test t) {
  ExperimentConfig cfg;
  cfg.test = t;
  switch (t) {
    case Test::test1:
      cfg.truth = TruthSpec::exp_decay(0.7, 1.0, 0.05);
      cfg.truth_desc = "exp_decay 0.7*exp(-t)+0.05";
      cfg.n_cells = 14;
      cfg.n_obs = 15;
      cfg.opt.max_refinements = 4;
      break;
    case Test::test2:
    case Test::custom:
      cfg.truth = TruthSpec::constant(0.7);
      cfg.truth_desc = "constant 0.7";
      cfg.n_cells = 19;
      cfg.n_obs = 20;
      cfg.opt.max_refinements = 6;
      break;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_keyvalues(const KeyValues& kv) {
  const std::string test_name = kv.get_string("run.test", "test2");
  Test test;
  if (test_name == "test1")
    test = Test::test1;
  else if (test_name == "test2")
    test = Test::test2;
  else if (test_name == "custom")
    test = Test::custom;
  else
    throw ConfigError("run.test must be test1, test2 or custom, got '" +
                      test_name + "'");

  ExperimentConfig cfg = for_test(test);

  cfg.sigmas = kv.get_double_list("noise.sigma", cfg.sigmas);
  for (double s : cfg.sigmas)
    if (!(s >= 0.0 && s <= 1.0))
      throw ConfigError("noise.sigma values must be in [0,1]");
  cfg.t1_list = kv.get_double_list("obs.t1", cfg.t1_list);
  cfg.base_seed = kv.get_uint64("noise.base_seed", cfg.base_seed);
  cfg.n_seeds = kv.get_int("noise.n_seeds", cfg.n_seeds);
  if (cfg.n_seeds < 1) throw ConfigError("noise.n_seeds must be >= 1");

  cfg.t_end = kv.get_double("mesh.t_end", cfg.t_end);
  cfg.t2 = kv.get_double("obs.t2", cfg.t_end);
  cfg.n_cells = static_cast<std::size_t>(
      kv.get_int("mesh.n_cells", static_cast<int>(cfg.n_cells)));
  cfg.n_obs = static_cast<std::size_t>(
      kv.get_int("obs.n_points", static_cast<int>(cfg.n_obs)));
  cfg.fine_factor = kv.get_int("mesh.fine_factor", cfg.fine_factor);
  if (cfg.fine_factor < 8)
    throw ConfigError("mesh.fine_factor must be >= 8 (data mesh separation)");

  const std::string kind =
      kv.get_string("truth.kind", test == Test::test1 ? "exp_decay"
                                                      : "constant");
  if (kind == "exp_decay") {
    cfg.truth = TruthSpec::exp_decay(kv.get_double("truth.amplitude", 0.7),
                                     kv.get_double("truth.rate", 1.0),
                                     kv.get_double("truth.offset", 0.05));
    cfg.truth_desc = "exp_decay " + format_double(kv.get_double("truth.amplitude", 0.7)) +
                     "*exp(-" + format_double(kv.get_double("truth.rate", 1.0)) +
                     " t)+" + format_double(kv.get_double("truth.offset", 0.05));
  } else if (kind == "constant") {
    const double level = kv.get_double("truth.level", 0.7);
    cfg.truth = TruthSpec::constant(level);
    cfg.truth_desc = "constant " + format_double(level);
  } else {
    throw ConfigError("truth.kind must be exp_decay or constant, got '" +
                      kind + "'");
  }

  cfg.params.s = kv.get_double("model.s", cfg.params.s);
  cfg.params.mu = kv.get_double("model.mu", cfg.params.mu);
  cfg.params.k = kv.get_double("model.k", cfg.params.k);
  cfg.params.mu1 = kv.get_double("model.mu1", cfg.params.mu1);
  cfg.params.alpha = kv.get_double("model.alpha", cfg.params.alpha);
  cfg.params.b = kv.get_double("model.b", cfg.params.b);
  cfg.params.delta = kv.get_double("model.delta", cfg.params.delta);
  cfg.params.c = kv.get_double("model.c", cfg.params.c);
  cfg.params.N = kv.get_double("model.N", cfg.params.N);
  cfg.params.validate();

  cfg.u0[0] = kv.get_double("init.u1", cfg.u0[0]);
  cfg.u0[1] = kv.get_double("init.u2", cfg.u0[1]);
  cfg.u0[2] = kv.get_double("init.u3", cfg.u0[2]);
  cfg.u0[3] = kv.get_double("init.u4", cfg.u0[3]);

  cfg.opt.theta = kv.get_double("optimizer.theta", cfg.opt.theta);
  cfg.opt.beta1 = kv.get_double("optimizer.beta1", cfg.opt.beta1);
  cfg.opt.max_cg_iters =
      kv.get_int("optimizer.max_cg_iters", cfg.opt.max_cg_iters);
  cfg.opt.max_refinements =
      kv.get_int("optimizer.max_refinements", cfg.opt.max_refinements);
  cfg.opt.stabilization_tol =
      kv.get_double("optimizer.stabilization_tol", cfg.opt.stabilization_tol);
  cfg.opt.growth_factor =
      kv.get_double("optimizer.growth_factor", cfg.opt.growth_factor);
  cfg.opt.refine_neighbors =
      kv.get_bool("optimizer.refine_neighbors", cfg.opt.refine_neighbors);
  const std::string rule =
      kv.get_string("optimizer.step_rule", "curvature_scaled");
  if (rule == "curvature_scaled")
    cfg.opt.step_rule = StepRule::curvature_scaled;
  else if (rule == "regularization_only")
    cfg.opt.step_rule = StepRule::regularization_only;
  else
    throw ConfigError(
        "optimizer.step_rule must be curvature_scaled or regularization_only");
  cfg.opt.validate();

  cfg.constants.ci_times_c =
      kv.get_double("estimates.ci_times_c", cfg.constants.ci_times_c);
  cfg.constants.d = kv.get_double("estimates.d", cfg.constants.d);
  cfg.constants.ci = kv.get_double("estimates.ci", cfg.constants.ci);

  cfg.zeta = kv.get_double("tikhonov.zeta", cfg.zeta);
  cfg.tik_mu = kv.get_double("tikhonov.mu", cfg.tik_mu);
  cfg.gamma_floor = kv.get_double("tikhonov.gamma_floor", cfg.gamma_floor);
  if (kv.has("tikhonov.gamma"))
    cfg.gamma_override = kv.get_double("tikhonov.gamma", 0.0);
  cfg.fit_degree = kv.get_int("tikhonov.fit_degree", cfg.fit_degree);

  cfg.out_dir = kv.get_string("run.out_dir", cfg.out_dir.string());
  cfg.write_artifacts = kv.get_bool("run.write_artifacts", cfg.write_artifacts);
  return cfg;
}

ScenarioResult run_scenario(const ExperimentConfig& cfg, double t1,
                            double sigma, int rep) {
  const TimeMesh mesh = TimeMesh::uniform(cfg.t_end, cfg.n_cells);
  const TimeMesh fine_mesh = TimeMesh::uniform(
      cfg.t_end, cfg.n_cells * static_cast<std::size_t>(cfg.fine_factor));
  const ObservationLayout layout{t1, cfg.t2, cfg.n_obs};

  SyntheticData data =
      generate_observations(cfg.params, cfg.u0, cfg.truth, layout, fine_mesh);

  const NoiseSpec noise_u4{sigma,
                           derive_seed(cfg.base_seed, t1, sigma, rep, kStreamU4)};
  ObservationSet noisy = add_noise(data.clean, noise_u4);

  // noisy u2, u3 at the initial-mesh nodes feed the initial guess
  std::vector<double> u2 =
      sample_component(data.fine_trajectory, 1, mesh.nodes());
  std::vector<double> u3 =
      sample_component(data.fine_trajectory, 2, mesh.nodes());
  u2 = add_noise_values(
      u2, {sigma, derive_seed(cfg.base_seed, t1, sigma, rep, kStreamU2)});
  u3 = add_noise_values(
      u3, {sigma, derive_seed(cfg.base_seed, t1, sigma, rep, kStreamU3)});
  const CellField eta0 =
      initial_guess_eta0(u2, u3, cfg.params, mesh, cfg.fit_degree);

  const double gamma = cfg.gamma_override
                           ? *cfg.gamma_override
                           : gamma_for_noise(sigma, cfg.tik_mu, cfg.gamma_floor);

  const SmoothnessWeight weight{t1, cfg.t2, cfg.zeta};
  weight.validate();
  const InverseProblem problem{cfg.params, cfg.u0, noisy, weight};
  const TikhonovConfig tik{gamma, eta0};

  const TruthSpec truth = cfg.truth;
  AcgaResult acga =
      run_acga(problem, tik, mesh, eta0, cfg.opt,
               [truth](double t) { return truth.at(t); }, cfg.constants);

  return {mesh, gamma, eta0, std::move(noisy), std::move(data),
          std::move(acga)};
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutcome outcome;
  nlohmann::json manifest;
  manifest["test"] = cfg.test == ExperimentConfig::Test::test1   ? "test1"
                     : cfg.test == ExperimentConfig::Test::test2 ? "test2"
                                                                 : "custom";
  manifest["truth"] = cfg.truth_desc;
  manifest["sigmas"] = cfg.sigmas;
  manifest["t1_list"] = cfg.t1_list;
  manifest["base_seed"] = cfg.base_seed;
  manifest["n_seeds"] = cfg.n_seeds;
  manifest["n_cells"] = cfg.n_cells;
  manifest["n_obs"] = cfg.n_obs;
  manifest["fine_factor"] = cfg.fine_factor;
  manifest["tik_mu"] = cfg.tik_mu;
  manifest["gamma_floor"] = cfg.gamma_floor;
  if (cfg.gamma_override) manifest["gamma_override"] = *cfg.gamma_override;
  manifest["max_refinements"] = cfg.opt.max_refinements;
  manifest["runs"] = nlohmann::json::array();

  if (cfg.write_artifacts) std::filesystem::create_directories(cfg.out_dir);

  // (t1, sigma, level) -> errors over seeds
  std::map<std::pair<double, double>, std::map<int, std::vector<double>>>
      grid;

  for (double t1 : cfg.t1_list) {
    for (double sigma : cfg.sigmas) {
      grid[{t1, sigma}];  // ensure blank rows for failed cells
      for (int rep = 0; rep < cfg.n_seeds; ++rep) {
        ++outcome.n_runs;
        nlohmann::json run;
        run["t1"] = t1;
        run["sigma"] = sigma;
        run["rep"] = rep;
        try {
          const ScenarioResult sr = run_scenario(cfg, t1, sigma, rep);
          for (const LevelResult& lr : sr.acga.levels) {
            if (lr.rel_error)
              grid[{t1, sigma}][lr.level].push_back(*lr.rel_error);
          }
          run["gamma"] = sr.gamma;
          run["levels"] = sr.acga.levels.size();
          nlohmann::json errs = nlohmann::json::array();
          for (const LevelResult& lr : sr.acga.levels)
            errs.push_back(lr.rel_error ? *lr.rel_error : -1.0);
          run["e_eta"] = errs;
          if (cfg.write_artifacts) {
            const auto dir = cfg.out_dir / run_dir_name(t1, sigma, rep);
            write_scenario_artifacts(cfg, sr, dir, t1, sigma, rep);
            run["artifacts"] = dir.string();
          }
        } catch (const std::exception& e) {
          ++outcome.n_failed;
          std::ostringstream what;
          what << "t1=" << format_double(t1) << " sigma=" << format_double(sigma)
               << " seed=" << rep << ": " << e.what();
          outcome.failures.push_back(what.str());
          run["error"] = e.what();
        }
        manifest["runs"].push_back(run);
      }
    }
  }

  for (const auto& [key, levels] : grid) {
    for (int level = 0; level <= cfg.opt.max_refinements; ++level) {
      ResultRow row;
      row.t1 = key.first;
      row.sigma = key.second;
      row.level = level;
      auto it = levels.find(level);
      if (it != levels.end() && !it->second.empty()) {
        const auto& v = it->second;
        row.e_eta = 0.0;
        row.e_min = *std::min_element(v.begin(), v.end());
        row.e_max = *std::max_element(v.begin(), v.end());
        double sum = 0.0;
        for (double x : v) sum += x;
        row.e_eta = sum / static_cast<double>(v.size());
      }
      outcome.table.rows.push_back(row);
    }
  }

  if (cfg.write_artifacts) {
    {
      std::ofstream out(cfg.out_dir / "results.csv");
      emit_table(outcome.table, out);
    }
    if (cfg.n_seeds > 1) {
      std::ofstream out(cfg.out_dir / "results_spread.csv");
      emit_table_with_spread(outcome.table, out);
    }
    manifest["failed"] = outcome.n_failed;
    std::ofstream out(cfg.out_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return outcome;
}

namespace {

void emit_rows(const ResultsTable& table, std::ostream& out, bool spread) {
  std::vector<ResultRow> rows = table.rows;
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.t1 != b.t1) return a.t1 < b.t1;
    if (a.sigma != b.sigma) return a.sigma < b.sigma;
    return a.level < b.level;
  });
  out << (spread ? "T1,sigma,level,e_eta,e_eta_min,e_eta_max\n"
                 : "T1,sigma,level,e_eta\n");
  for (const ResultRow& r : rows) {
    out << format_double(r.t1) << "," << format_double(r.sigma) << ","
        << r.level << ",";
    if (r.e_eta) out << format_double(*r.e_eta);
    if (spread) {
      out << ",";
      if (r.e_min) out << format_double(*r.e_min);
      out << ",";
      if (r.e_max) out << format_double(*r.e_max);
    }
    out << "\n";
  }
}

}  // namespace

void emit_table(const ResultsTable& table, std::ostream& out) {
  emit_rows(table, out, false);
}

void emit_table_with_spread(const ResultsTable& table, std::ostream& out) {
  emit_rows(table, out, true);
}

}  // namespace hivpip
