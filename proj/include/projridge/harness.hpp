#pragma once
// Simulation harness: runs a study end to end for the four estimators,
// aggregates L2-norm errors, and runs the rate-check and selection-band
// experiments. Reports are pure functions of (config, methods, options):
// replications run on a worker pool but every random draw is keyed by the
// replication index and results are merged by index.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "projridge/simgen.hpp"
#include "projridge/threshold.hpp"

namespace projridge {

enum class Method { thresholded_ridge, ridge, lasso, enet };

std::string to_string(Method m);
Method parse_method(const std::string& s);
const std::vector<Method>& all_methods();

struct RunOptions {
  unsigned workers = 0;  // 0: std::thread::hardware_concurrency()
  double alpha = 0.5;    // threshold exponent for the thresholded ridge
  int lasso_path_points = 50;
  double lasso_path_ratio = 1000.0;
  std::vector<double> enet_lambda2 = {0.01, 0.1, 1.0, 10.0};
  int ridge_grid_points = 50;
  int folds = 5;
  double cd_tol = 1e-7;
  long cd_max_iter = 100000;
  NoiseHook noise;  // empty: Gaussian
};

struct ReplicationResult {
  Method method = Method::ridge;
  long replication = 0;
  bool ok = false;
  std::string error;
  double l2_error = 0.0;        // n⁻¹‖Xβ − Xϑ̂‖²
  long selected_count = -1;     // thresholded ridge only
  std::optional<BandCheck> band_check;
  double tuning1 = 0.0;         // C1 | h | λ | λ
  double tuning2 = 0.0;         // C2 | –  | –  | λ₂
  double kkt = 0.0;             // lasso/enet: KKT violation of the final fit
};

struct StudyReport {
  StudyConfig config;
  std::vector<Method> methods;
  RunOptions options;
  std::string design_label;
  std::vector<std::string> warnings;
  Eigen::Index rank = 0;
  double beta_norm = 0.0;
  double theta_norm = 0.0;
  std::vector<std::vector<ReplicationResult>> results;  // [method][replication]
  std::vector<double> mean_l2;                           // over successful replications
  std::vector<long> failures;
  std::vector<double> cumulative;                        // cumulative proportion of θ
};

unsigned resolve_workers(unsigned requested);

// Seed for the fold assignment of replication r.
std::uint64_t fold_seed(std::uint64_t master_seed, std::uint64_t replication);

StudyReport run_study(const StudyConfig& cfg, const std::vector<Method>& methods, const RunOptions& opts = {});

// Sorted θ_j² (descending) partial sums over ‖θ‖²; the last entry is 1.
std::vector<double> cumulative_proportion(const Vector& theta);

// ---- rate checks -----------------------------------------------------------

enum class Theorem { t1ii, t3 };
std::string to_string(Theorem t);
Theorem parse_theorem(const std::string& s);

struct RateScenario {
  std::string name;
  std::string description;
  double sigma = 1.0;
  // "orthogonal": X = sqrt(n)·[I_n | 0], p = 2n, θ = e₁, fixed h.
  // "bounded-q": block-orthogonal X with p = 4n, θ = 1 on the 5-column
  //              block and 0 elsewhere, schedule-driven (a_n, h_n).
  double fixed_h = 0.0;  // > 0 overrides the schedule for h
  ScheduleParams schedule;
  double predicted_ridge_slope = 0.0;
  double predicted_thresholded_slope = 0.0;
};

RateScenario rate_scenario(const std::string& name);
std::vector<std::string> rate_scenario_names();

struct RateCheckReport {
  Theorem theorem = Theorem::t1ii;
  std::string scenario;
  std::vector<long> n_values;
  std::vector<double> a_values, h_values;
  std::vector<double> ridge_error;        // exact expected_l2_error
  std::vector<double> thresholded_error;  // Monte-Carlo mean (t3 only)
  std::vector<double> thresholded_se;
  double ridge_slope = 0.0;
  double thresholded_slope = 0.0;
  double thresholded_slope_se = 0.0;
  double predicted_ridge_slope = 0.0;
  double predicted_thresholded_slope = 0.0;
  long replications = 0;
};

RateCheckReport rate_check(Theorem theorem, const std::string& scenario, const std::vector<long>& n_values,
                           std::uint64_t seed, long replications = 500);

// OLS slope of log(y) on log(x).
double loglog_slope(const std::vector<long>& x, const std::vector<double>& y);

// ---- selection band frequency ---------------------------------------------

struct BandFrequencyReport {
  long replications = 0;
  long both_ok = 0;
  long lower_fail = 0;
  long upper_fail = 0;
  long consistency_events = 0;   // band passed and q_plus == q_minus
  long implication_failures = 0; // consistency event but selected != M_{θ,a}
  double frequency = 0.0;
  double a = 0.0, h = 0.0;
  SparsityProfile profile;
  double min_large = 0.0;  // min |θ_j| over M_{θ,a}
  double max_small = 0.0;  // max |θ_j| outside M_{θ,a}
};

// n = 200, p = 1000 block-orthogonal design with θ = 1 on five columns,
// σ = 1; schedule C1 = 1, α = 1/2, C2 = 0.01 (Gaussian regime).
StudyConfig band_preset();
ScheduleParams band_schedule();

BandFrequencyReport selection_band_frequency(const StudyConfig& cfg, const ScheduleParams& s);

// ---- serialization (report.cpp) --------------------------------------------

nlohmann::json config_to_json(const StudyConfig& c);
// Study presets only accept n, p, master_seed, replications (and a fixture
// path for study III); other fields must match the preset.
StudyConfig config_from_json(const nlohmann::json& j, std::optional<StudyId> cli_study = std::nullopt);
StudyConfig load_config(const std::filesystem::path& path, std::optional<StudyId> cli_study = std::nullopt);

nlohmann::json options_to_json(const RunOptions& o);
RunOptions options_from_json(const nlohmann::json& j);

// Writes table.txt, table.csv, replications.csv, cumulative_proportion.tsv
// and manifest.json into `dir` (created if needed). Returns written paths.
std::vector<std::filesystem::path> emit_report(const StudyReport& report, const std::filesystem::path& dir);

struct Manifest {
  StudyConfig config;
  std::vector<Method> methods;
  RunOptions options;
  std::string kernel_isa;
};
Manifest load_manifest(const std::filesystem::path& path);

nlohmann::json rate_report_to_json(const RateCheckReport& r);

// Same layout as nlohmann's dump(indent), but doubles are written with 17
// significant digits (NaN and infinities as null).
std::string dump_json(const nlohmann::json& j, int indent = 2);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace projridge
