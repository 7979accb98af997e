#pragma once

// Batch orchestration: JSON job configs in, report.json plus CSV/JSON data out.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "complab/classifier.hpp"
#include "complab/deficiency.hpp"
#include "complab/flow.hpp"
#include "complab/lorentz.hpp"

namespace complab {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class JobKind { Sturm, Lorentz, Degree1 };
enum class Pipeline { Classify, Flow, Frobenius, Deficiency, Crosscheck };

std::string to_string(JobKind k);
std::string to_string(Pipeline p);
JobKind job_kind_from_string(const std::string& s);
Pipeline pipeline_from_string(const std::string& s);

struct NumericControls {
  double t_max = 1e3;
  double xi_cap = 1e6;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int series_order = 20;
  double eps_hi = 1e-2;
  double eps_lo = 1e-6;
  unsigned seed = 0;

  bool operator==(const NumericControls&) const = default;
};

struct JobConfig {
  JobKind kind = JobKind::Sturm;
  std::string name = "job";
  TrigPoly a = TrigPoly::constant_fn(1.0);
  TrigPoly b;
  bool include_a4 = false;
  std::optional<LorentzModel> model;
  std::optional<CotangentState> init;  // Lorentz geodesic seed; a model default when absent
  int mode = 1;                        // Fourier mode for the Lorentz reduction
  NumericControls controls;
  std::set<Pipeline> pipelines{Pipeline::Classify, Pipeline::Flow, Pipeline::Frobenius, Pipeline::Deficiency,
                               Pipeline::Crosscheck};

  bool operator==(const JobConfig&) const = default;
};

/// Throws ConfigError on missing/ill-typed fields or out-of-range controls.
JobConfig parse_config(const json& j);
JobConfig load_config(const std::filesystem::path& path);
json config_to_json(const JobConfig& c);

/// Coefficient format {"const": c, "cos": [...], "sin": [...]}.
json trig_to_json(const TrigPoly& f);
TrigPoly trig_from_json(const json& j);

struct ReportError {
  std::string stage;
  std::string code;
  std::string message;

  bool operator==(const ReportError&) const = default;
};

struct FlowWitness {
  double x = 0.0, xi = 0.0;
  std::string branch;
  int direction = 1;
  std::string status;
  std::optional<double> escape_time;
  std::optional<double> escape_uncertainty;

  bool operator==(const FlowWitness&) const = default;
};

struct FlowEvidence {
  bool complete_evidence = true;
  int runs = 0;
  int incomplete_runs = 0;
  double max_abs_xi = 0.0;
  double max_p_drift = 0.0;
  std::optional<FlowWitness> witness;
  std::string citation;

  bool operator==(const FlowEvidence&) const = default;
};

struct SeriesEvidence {
  double zero = 0.0;
  std::string side;
  std::string label;
  double exponent_re = 0.0, exponent_im = 0.0;
  bool log = false;
  int truncation = 0;
  double residual_slope = 0.0;  // may be +inf when the series terminates
  double empirical_radius = 0.0;
  std::string file;

  bool operator==(const SeriesEvidence&) const = default;
};

struct SolutionEvidence {
  std::string label;
  std::string kind;
  double exponent_re = 0.0, exponent_im = 0.0;
  bool log = false;
  bool l2_symbolic = false;
  bool l2_numeric = false;
  double decay_slope = 0.0;

  bool operator==(const SolutionEvidence&) const = default;
};

struct EndpointEvidence {
  double zero = 0.0;
  std::string side;
  double lambda_im = 0.0;
  double lambda_used_im = 0.0;
  std::string verdict;
  std::string numeric_verdict;
  std::string rule;
  std::vector<SolutionEvidence> solutions;

  bool operator==(const EndpointEvidence&) const = default;
};

struct DeficiencyEvidence {
  int n_plus = 0;
  int n_minus = 0;
  bool esa = true;
  bool symbolic_numeric_agreement = true;
  std::vector<EndpointEvidence> cells;
  std::string citation;

  bool operator==(const DeficiencyEvidence&) const = default;
};

struct TrajectoryEvidence {
  std::string status;
  std::optional<double> escape_time;
  std::optional<double> escape_uncertainty;
  double drift = 0.0;
  std::string file;

  bool operator==(const TrajectoryEvidence&) const = default;
};

struct ConformalEvidence {
  double phi_constant = 0.0;
  double phi_amplitude = 0.0;
  bool same_verdict = true;
  double hausdorff = 0.0;
  std::optional<double> escape_ratio;
  std::string citation;

  bool operator==(const ConformalEvidence&) const = default;
};

struct LorentzEvidence {
  std::string variant;
  std::optional<bool> esa;
  int mode = 1;
  std::string reduction;
  std::optional<CompletenessReport> reduced_report;
  std::optional<TrajectoryEvidence> geodesic;
  std::optional<ConformalEvidence> conformal;
  std::string citation;

  bool operator==(const LorentzEvidence&) const = default;
};

struct JobReport {
  std::string name;
  std::string kind;
  std::optional<CompletenessReport> classification;
  std::string classification_citation;
  std::optional<FlowEvidence> flow;
  std::vector<SeriesEvidence> series;
  std::optional<DeficiencyEvidence> deficiency;
  std::optional<bool> agreement;
  std::vector<std::string> differences;
  std::optional<LorentzEvidence> lorentz;
  std::optional<Degree1Rule> degree1;
  std::vector<ReportError> errors;

  bool operator==(const JobReport&) const = default;
};

json report_to_json(const JobReport& r);
JobReport report_from_json(const json& j);

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 config error, 3 numeric failure
  JobReport report;
};

/// Runs the requested pipelines and writes report.json, trajectories/*.csv and
/// series/*.json under `outdir`.
RunOutcome run(const JobConfig& config, const std::filesystem::path& outdir);

/// Loads and runs a config file; an unreadable or invalid config yields exit
/// code 2 with the error recorded in report.json.
RunOutcome run_file(const std::filesystem::path& config, const std::filesystem::path& outdir,
                    const std::optional<std::set<Pipeline>>& pipelines = std::nullopt,
                    const std::function<void(JobConfig&)>& overrides = {});

/// The built-in operators E1..E6 and the three Lorentz models.
std::vector<JobConfig> gallery_configs();

/// Writes one <name>.json per gallery entry; returns the paths.
std::vector<std::filesystem::path> gallery(const std::filesystem::path& outdir);

}  // namespace complab
