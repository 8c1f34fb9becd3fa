// experiment.hpp
//
// Reconstruction-experiment harness behind the CLI: builds a scenario
// (truth, synthetic observations, noise, initial guess), runs the
// adaptive optimizer over a (T1, sigma, seed) grid and writes result
// tables plus per-run artifact files under one output directory.

#pragma once

#include "hivpip/config.hpp"
#include "hivpip/optimizer.hpp"
#include "hivpip/synthetic_data.hpp"

namespace hivpip {

struct ExperimentConfig {
  enum class Test { test1, test2, custom };

  Test test = Test::test2;
  std::vector<double> sigmas{0.05, 0.10, 0.20, 0.40};
  std::vector<double> t1_list{25.0, 50.0, 100.0};
  std::uint64_t base_seed = 1;
  int n_seeds = 1;

  double t_end = 300.0;
  double t2 = 300.0;            // observation window end
  std::size_t n_cells = 19;     // initial uniform mesh
  std::size_t n_obs = 20;
  int fine_factor = 16;         // data mesh is n_cells * fine_factor

  TruthSpec truth = TruthSpec::constant(0.7);
  std::string truth_desc = "constant 0.7";

  ModelParams params;
  StateVec u0 = kDefaultInitialState;
  OptimizerConfig opt;
  EstimateConstants constants;

  double zeta = 0.05;
  double tik_mu = 0.15;         // gamma = sigma^(2 mu)
  double gamma_floor = 1e-8;
  std::optional<double> gamma_override;
  int fit_degree = 3;

  std::filesystem::path out_dir = "out";
  bool write_artifacts = true;

  static ExperimentConfig for_test(Test t);
  // Defaults for keys absent from kv come from the selected test.
  static ExperimentConfig from_keyvalues(const KeyValues& kv);
};

// Stable per-run seed: hashes the (T1, sigma) values themselves plus
// the replicate and stream indices, so extending a sigma list does not
// shift the noise of existing rows.
std::uint64_t derive_seed(std::uint64_t base, double t1, double sigma, int rep,
                          std::uint32_t stream);

struct ScenarioResult {
  TimeMesh mesh;           // initial inversion mesh
  double gamma = 0.0;
  CellField eta0;
  ObservationSet noisy_obs;
  SyntheticData data;
  AcgaResult acga;
};

// One full reconstruction: synthesize data for (t1, sigma, rep), build
// the initial guess and run ACGA against the known truth.
ScenarioResult run_scenario(const ExperimentConfig& cfg, double t1,
                            double sigma, int rep);

struct ResultRow {
  double t1 = 0.0;
  double sigma = 0.0;
  int level = 0;
  std::optional<double> e_eta;  // mean over seeds; empty when the level
                                // was never reached (blank table cell)
  std::optional<double> e_min;
  std::optional<double> e_max;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
};

struct ExperimentOutcome {
  ResultsTable table;
  int n_runs = 0;
  int n_failed = 0;
  std::vector<std::string> failures;  // "t1=.. sigma=.. seed=..: what"
};

ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Header "T1,sigma,level,e_eta"; rows sorted by (T1, sigma, level);
// blank cells render as empty fields.
void emit_table(const ResultsTable& table, std::ostream& out);
// Same rows with mean/min/max columns, for multi-seed grids.
void emit_table_with_spread(const ResultsTable& table, std::ostream& out);

}  // namespace hivpip
