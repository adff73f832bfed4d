#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fbmiso/forward.hpp"
#include "fbmiso/quadrature.hpp"

namespace fbmiso {

enum class Study { Isometry, KernelConvergence, LemmaSuite, DetComponent, BoundScaling };

Study parse_study(const std::string& name);
std::string study_name(Study s);

struct ExperimentConfig {
  Study study = Study::Isometry;
  std::vector<double> h_values{0.75};
  int d = 1;
  double T = 1.0;
  std::vector<double> eps_ladder{0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};
  std::vector<std::string> integrands{"constant:1"};
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  bool seed_set = false;
  QuadratureSpec quadrature;
  std::string output_dir = "out";
  int workers = 0;

  SamplerChoice sampler = SamplerChoice::Circulant;
  TimeRule rule = TimeRule::Trapezoid;

  // kernel-convergence and det-component
  std::vector<double> kernel_eps{1e-1, 1e-2, 1e-3, 1e-4};
  double point_s = 0.3;
  double point_t = 0.7;
  std::vector<double> q_values{1.0, 1.2};
  std::size_t n_mc = 400;
  double det_p = 1.0;
  double det_threshold = 1e-2;
  double strip_slope_tolerance = 0.1;
  double pointwise_tolerance = 0.01;

  // lemma-suite
  std::size_t lemma_samples = 10000;
  std::string constants_path = "data/recorded_constants.ini";
  int west_grid = 50;
  std::vector<double> west_q{1.5, 2.0};
  double west_stability = 0.1;

  // bound-scaling
  std::vector<double> v_values{0.125, 0.25, 0.5, 1.0};
  double slope_tolerance = 0.05;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
  /// Canonical key = value text, the input of config_hash (workers and the
  /// output directory are excluded).
  std::string canonical() const;
};

/// Reads an INI file; keys missing from the file keep their defaults.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& text);
std::string config_hash(const ExperimentConfig& cfg);
std::string build_id();

struct ReportRow {
  double h = 0.0;
  int d = 1;
  std::string quantity;
  std::string label;
  double x = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  std::string pass;  // "1", "0" or empty for informational rows
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct StudyReport {
  Study study = Study::Isometry;
  std::vector<ReportRow> rows;
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

StudyReport run_isometry(const ExperimentConfig& cfg);
StudyReport run_kernel_convergence(const ExperimentConfig& cfg);
StudyReport run_lemma_suite(const ExperimentConfig& cfg);
StudyReport run_det_component(const ExperimentConfig& cfg);
StudyReport run_bound_scaling(const ExperimentConfig& cfg);
StudyReport run_study(const ExperimentConfig& cfg);

/// CSV starting with `#schema=1`; every row carries seed, build id and config hash.
void write_csv(std::ostream& out, const StudyReport& report, const ExperimentConfig& cfg);
/// One PASS/FAIL line per check and an overall verdict.
void write_summary(std::ostream& out, const StudyReport& report, const ExperimentConfig& cfg);

/// Writes <out>/<study>.csv and <out>/summary.txt.
void write_outputs(const StudyReport& report, const ExperimentConfig& cfg);

}  // namespace fbmiso
