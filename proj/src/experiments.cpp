#include "fbmiso/experiments.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "fbmiso/bounds.hpp"
#include "fbmiso/covariance.hpp"
#include "fbmiso/integrand.hpp"
#include "fbmiso/kernel.hpp"
#include "fbmiso/sampler.hpp"
#include "fbmiso/stats.hpp"

#ifndef FBMISO_BUILD_ID
#define FBMISO_BUILD_ID "unknown"
#endif

namespace fbmiso {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + g17(v[i]);
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return !v.empty();
}

std::string flag(bool ok) { return ok ? "1" : "0"; }

void add_check(StudyReport& r, std::string name, bool ok, std::string detail) {
  r.checks.push_back({std::move(name), ok, std::move(detail)});
}

std::string h_tag(double h) { return fmt::format("H={:g}", h); }

// closed-form E[(int_0^T <Y, dB>)^2] where one is known
double isometry_oracle(const HurstModel& m, const Integrand& y, double T) {
  if (y.is_constant()) return y(0.0, Eigen::VectorXd::Zero(m.dim())).squaredNorm() * std::pow(T, m.two_h());
  if (y.name() == "identity") {
    // E[(|B_T|^2 / 2)^2] = (d^2 + 2d) T^4H / 4
    const double d = m.dim();
    return 0.25 * (d * d + 2.0 * d) * std::pow(T, 2.0 * m.two_h());
  }
  return kNaN;
}

double oracle_tolerance(const Integrand& y) { return y.is_constant() ? 1e-4 : 1e-3; }

LadderOptions ladder_options(const ExperimentConfig& cfg, double T, double scale, std::uint64_t seed,
                             const Integrand& y) {
  LadderOptions opt;
  for (double e : cfg.eps_ladder) opt.eps_ladder.push_back(e * scale);
  opt.T = T;
  opt.n_paths = cfg.n_paths;
  opt.seed = seed;
  opt.workers = cfg.workers;
  opt.sampler = cfg.sampler;
  // discontinuous integrands use left-point sums
  opt.rule = y.jump_at_zero() ? TimeRule::LeftPoint : cfg.rule;
  return opt;
}

QuadratureSpec quad_spec(const ExperimentConfig& cfg) {
  QuadratureSpec spec = cfg.quadrature;
  spec.workers = cfg.workers;
  return spec;
}

}  // namespace

Study parse_study(const std::string& name) {
  if (name == "isometry") return Study::Isometry;
  if (name == "kernel-convergence") return Study::KernelConvergence;
  if (name == "lemma-suite") return Study::LemmaSuite;
  if (name == "det-component") return Study::DetComponent;
  if (name == "bound-scaling") return Study::BoundScaling;
  throw std::invalid_argument("unknown study '" + name + "'");
}

std::string study_name(Study s) {
  switch (s) {
    case Study::Isometry:
      return "isometry";
    case Study::KernelConvergence:
      return "kernel-convergence";
    case Study::LemmaSuite:
      return "lemma-suite";
    case Study::DetComponent:
      return "det-component";
    case Study::BoundScaling:
      return "bound-scaling";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (!seed_set) throw std::invalid_argument("a seed must be given in the config or with --seed");
  if (h_values.empty()) throw std::invalid_argument("h list is empty");
  for (double h : h_values) HurstModel(h, d);
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!strictly_decreasing(eps_ladder)) throw std::invalid_argument("eps ladder must be strictly decreasing");
  if (!strictly_decreasing(kernel_eps)) throw std::invalid_argument("kernel eps ladder must be strictly decreasing");
  for (double e : eps_ladder) {
    if (!(e > 0.0)) throw std::invalid_argument("eps values must be positive");
  }
  if (integrands.empty()) throw std::invalid_argument("no integrands given");
  for (const auto& y : integrands) make_integrand(y, d);
  if (n_paths < 1000) throw std::invalid_argument("n_paths must be at least 1000");
  quadrature.validate();
  if (!(point_s > 0.0 && point_t > 0.0 && point_s != point_t)) throw std::invalid_argument("bad kernel point");
  if (lemma_samples < 1) throw std::invalid_argument("lemma_samples must be positive");
  if (west_grid < 1) throw std::invalid_argument("west_grid must be positive");
  for (double v : v_values) {
    if (!(v > 0.0)) throw std::invalid_argument("v values must be positive");
  }
  if (study == Study::BoundScaling && d != 1) throw std::invalid_argument("bound-scaling supports d = 1 only");
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  const auto put = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  put("study", study_name(study));
  put("h", join(h_values));
  put("d", std::to_string(d));
  put("T", g17(T));
  put("eps", join(eps_ladder));
  std::string ys;
  for (std::size_t i = 0; i < integrands.size(); ++i) ys += (i ? ";" : "") + integrands[i];
  put("integrands", ys);
  put("n_paths", std::to_string(n_paths));
  put("seed", std::to_string(seed));
  put("sampler", sampler == SamplerChoice::Circulant ? "circulant" : "cholesky");
  put("rule", rule == TimeRule::Trapezoid ? "trapezoid" : "left");
  const auto& q = quadrature;
  put("quadrature", fmt::format("{},{},{},{},{},{},{},{},{},{}", q.gh_order, q.panel_points, g17(q.grading_ratio),
                                q.layers, q.bulk_panels, g17(q.band), g17(q.tolerance), q.polar_points, q.refinements,
                                q.max_tensor_nodes));
  put("kernel_eps", join(kernel_eps));
  put("point", g17(point_s) + "," + g17(point_t));
  put("q", join(q_values));
  put("n_mc", std::to_string(n_mc));
  put("det", g17(det_p) + "," + g17(det_threshold) + "," + g17(strip_slope_tolerance) + "," + g17(pointwise_tolerance));
  put("lemmas", std::to_string(lemma_samples) + "," + constants_path + "," + std::to_string(west_grid) + "," +
                    join(west_q) + "," + g17(west_stability));
  put("v", join(v_values));
  put("slope_tolerance", g17(slope_tolerance));
  return out;
}

ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  const auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
    if (!v) return std::nullopt;
    return trim(*v);
  };
  const auto num = [&](const std::string& section, const std::string& key, auto& target) {
    if (auto v = get(section, key)) {
      using T = std::decay_t<decltype(target)>;
      try {
        if constexpr (std::is_floating_point_v<T>) {
          target = std::stod(*v);
        } else {
          target = static_cast<T>(std::stoll(*v));
        }
      } catch (const std::exception&) {
        throw std::invalid_argument("config: bad value for " + section + "." + key + ": '" + *v + "'");
      }
    }
  };
  const auto list = [&](const std::string& section, const std::string& key, std::vector<double>& target) {
    if (auto v = get(section, key)) target = parse_list(*v);
  };

  if (auto v = get("study", "name")) cfg.study = parse_study(*v);
  if (auto v = get("study", "seed")) {
    cfg.seed = std::stoull(*v);
    cfg.seed_set = true;
  }
  list("model", "h", cfg.h_values);
  num("model", "d", cfg.d);
  num("model", "T", cfg.T);
  list("forward", "eps", cfg.eps_ladder);
  num("forward", "n_paths", cfg.n_paths);
  if (auto v = get("forward", "integrands")) cfg.integrands = split(*v, ';');
  if (auto v = get("forward", "sampler")) {
    if (*v == "circulant") {
      cfg.sampler = SamplerChoice::Circulant;
    } else if (*v == "cholesky") {
      cfg.sampler = SamplerChoice::Cholesky;
    } else {
      throw std::invalid_argument("config: unknown sampler '" + *v + "'");
    }
  }
  if (auto v = get("forward", "rule")) {
    if (*v == "trapezoid") {
      cfg.rule = TimeRule::Trapezoid;
    } else if (*v == "left") {
      cfg.rule = TimeRule::LeftPoint;
    } else {
      throw std::invalid_argument("config: unknown time rule '" + *v + "'");
    }
  }
  auto& q = cfg.quadrature;
  num("quadrature", "gh_order", q.gh_order);
  num("quadrature", "panel_points", q.panel_points);
  num("quadrature", "grading_ratio", q.grading_ratio);
  num("quadrature", "layers", q.layers);
  num("quadrature", "bulk_panels", q.bulk_panels);
  num("quadrature", "band", q.band);
  num("quadrature", "tolerance", q.tolerance);
  num("quadrature", "polar_points", q.polar_points);
  num("quadrature", "refinements", q.refinements);
  num("quadrature", "max_tensor_nodes", q.max_tensor_nodes);
  list("kernel", "eps", cfg.kernel_eps);
  num("kernel", "s", cfg.point_s);
  num("kernel", "t", cfg.point_t);
  list("kernel", "q", cfg.q_values);
  num("kernel", "n_mc", cfg.n_mc);
  num("kernel", "det_p", cfg.det_p);
  num("kernel", "det_threshold", cfg.det_threshold);
  num("kernel", "strip_slope_tolerance", cfg.strip_slope_tolerance);
  num("kernel", "pointwise_tolerance", cfg.pointwise_tolerance);
  num("lemmas", "samples", cfg.lemma_samples);
  if (auto v = get("lemmas", "constants")) cfg.constants_path = *v;
  num("lemmas", "west_grid", cfg.west_grid);
  list("lemmas", "west_q", cfg.west_q);
  num("lemmas", "west_stability", cfg.west_stability);
  list("scaling", "v", cfg.v_values);
  num("scaling", "slope_tolerance", cfg.slope_tolerance);
  if (auto v = get("output", "dir")) cfg.output_dir = *v;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  return parse_config(in);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) { return fmt::format("{:016x}", fnv1a64(cfg.canonical())); }

std::string build_id() { return FBMISO_BUILD_ID; }

bool StudyReport::all_passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

StudyReport run_isometry(const ExperimentConfig& cfg) {
  StudyReport rep;
  rep.study = Study::Isometry;
  const auto spec = quad_spec(cfg);
  for (double h : cfg.h_values) {
    const HurstModel m(h, cfg.d);
    for (const auto& desc : cfg.integrands) {
      const auto y = make_integrand(desc, cfg.d);
      const std::string tag = fmt::format("{} {} d={}", h_tag(h), desc, cfg.d);
      spdlog::info("isometry: {}", tag);
      try {
        const auto lhs = second_moment_ladder(m, y, ladder_options(cfg, cfg.T, 1.0, cfg.seed, y));
        for (std::size_t k = 0; k < lhs.eps.size(); ++k) {
          rep.rows.push_back({h, cfg.d, "lhs_moment", desc, lhs.eps[k], lhs.moments[k].value, lhs.moments[k].std_error, kNaN, ""});
        }
        for (std::size_t k = 1; k < lhs.eps.size(); ++k) {
          rep.rows.push_back({h, cfg.d, "lhs_cauchy_difference", desc, lhs.eps[k],
                              std::abs(lhs.moments[k].value - lhs.moments[k - 1].value), 0.0, kNaN, ""});
        }
        const auto rhs = rhs_isometry(m, y, cfg.T, spec);
        const double oracle = isometry_oracle(m, y, cfg.T);
        const double se = lhs.extrapolated.std_error;
        const double budget = 4.0 * se + rhs.error;
        const bool agree = std::abs(lhs.extrapolated.value - rhs.value) <= budget;
        rep.rows.push_back({h, cfg.d, "lhs_extrapolated", desc, 0.0, lhs.extrapolated.value, se, rhs.value, flag(agree)});
        rep.rows.push_back({h, cfg.d, "rhs_quadrature", desc, 0.0, rhs.value, rhs.error, oracle, flag(rhs.converged)});
        add_check(rep, "rhs converged " + tag, rhs.converged, fmt::format("error estimate {:.3g}", rhs.error));
        add_check(rep, "lhs vs rhs " + tag, agree,
                  fmt::format("lhs {:.6g} +- {:.3g}, rhs {:.6g} +- {:.3g}", lhs.extrapolated.value, se, rhs.value,
                              rhs.error));
        if (!std::isnan(oracle)) {
          const double rel = std::abs(rhs.value - oracle) / std::abs(oracle);
          const bool rhs_ok = rel <= oracle_tolerance(y);
          const bool lhs_ok = std::abs(lhs.extrapolated.value - oracle) <= 4.0 * se;
          rep.rows.push_back({h, cfg.d, "oracle", desc, 0.0, oracle, 0.0, kNaN, ""});
          add_check(rep, "rhs vs closed form " + tag, rhs_ok,
                    fmt::format("relative error {:.3g} (tolerance {:g})", rel, oracle_tolerance(y)));
          add_check(rep, "lhs vs closed form " + tag, lhs_ok,
                    fmt::format("|lhs - exact| = {:.3g}, 4 SE = {:.3g}", std::abs(lhs.extrapolated.value - oracle),
                                4.0 * se));
        }
      } catch (const std::exception& e) {
        rep.rows.push_back({h, cfg.d, "error", desc, 0.0, kNaN, kNaN, kNaN, "0"});
        add_check(rep, "isometry " + tag, false, e.what());
      }
    }
  }
  return rep;
}

namespace {

void kernel_pointwise(StudyReport& rep, const ExperimentConfig& cfg, const HurstModel& m) {
  const auto p = SimplexPoint::from_times(cfg.point_s, cfg.point_t);
  const PairSample x = sample_pair(m, p, 1, cfg.seed).front();
  const double lim = Lambda_kernel(m, p, x).entries.norm();
  std::vector<double> diffs;
  for (double eps : cfg.kernel_eps) {
    const double diff = (Lambda_finite(m, eps, eps, p, x).entries - Lambda_kernel(m, p, x).entries).norm();
    diffs.push_back(diff);
    rep.rows.push_back({m.h(), m.dim(), "pointwise_distance", "Lambda", eps, diff, 0.0, lim, ""});
  }
  const std::string tag = h_tag(m.h());
  add_check(rep, "pointwise distance strictly decreasing " + tag, strictly_decreasing(diffs),
            fmt::format("distances {}", join(diffs)));
  const double rel = diffs.back() / lim;
  add_check(rep, "pointwise final distance below tolerance " + tag, rel < cfg.pointwise_tolerance,
            fmt::format("|Lambda^- - Lambda| / |Lambda| = {:.3g} at eps = {:g} (tolerance {:g})", rel,
                        cfg.kernel_eps.back(), cfg.pointwise_tolerance));
}

void kernel_lq(StudyReport& rep, const ExperimentConfig& cfg, const HurstModel& m, const QuadratureSpec& spec) {
  const std::string tag = h_tag(m.h());
  const double qmax = std::min(1.0 / (m.two_h() - 1.0), 1.0 / (2.0 - m.two_h()));
  for (double q : cfg.q_values) {
    if (!(q < qmax)) {
      spdlog::warn("kernel-convergence: q = {} is outside the admissible range at H = {}", q, m.h());
      continue;
    }
    const std::string label = fmt::format("q={:g}", q);
    std::vector<double> det_values, mc_values;
    for (double eps : cfg.kernel_eps) {
      const auto mc = lq_distance_finite_to_limit(m, eps, q, cfg.T, spec, cfg.n_mc, cfg.seed);
      rep.rows.push_back({m.h(), m.dim(), "lq_distance_mc", label, eps, mc.value, mc.std_error, kNaN, ""});
      mc_values.push_back(mc.value);
      if (m.dim() == 1) {
        const auto det = lq_distance_polar(m, eps, q, cfg.T, spec);
        rep.rows.push_back({m.h(), m.dim(), "lq_distance_quadrature", label, eps, det.value, det.error, kNaN,
                            flag(det.converged)});
        det_values.push_back(det.value);
      }
    }
    const auto& checked = m.dim() == 1 ? det_values : mc_values;
    add_check(rep, fmt::format("L^{:g} distance decreasing {}", q, tag), strictly_decreasing(checked),
              fmt::format("distances {}", join(checked)));
  }
}

void det_ladder(StudyReport& rep, const ExperimentConfig& cfg, const HurstModel& m, const QuadratureSpec& spec,
                bool threshold_check) {
  const std::string tag = h_tag(m.h());
  std::vector<double> values;
  for (double eps : cfg.kernel_eps) {
    const auto est = det_distance(m, eps, eps, cfg.det_p, cfg.T, spec);
    rep.rows.push_back({m.h(), m.dim(), "det_distance", fmt::format("p={:g}", cfg.det_p), eps, est.value, est.error,
                        kNaN, flag(est.converged)});
    values.push_back(est.value);
  }
  add_check(rep, "deterministic distance decreasing " + tag, strictly_decreasing(values),
            fmt::format("distances {}", join(values)));
  if (threshold_check) {
    add_check(rep, "deterministic distance below threshold " + tag, values.back() < cfg.det_threshold,
              fmt::format("{:.4g} at eps = {:g} (threshold {:g})", values.back(), cfg.kernel_eps.back(),
                          cfg.det_threshold));
  }
}

void strip_slope(StudyReport& rep, const ExperimentConfig& cfg, const HurstModel& m, const QuadratureSpec& spec) {
  std::vector<double> values;
  for (double eps : cfg.kernel_eps) {
    const auto est = det_strip(m, eps, eps, cfg.det_p, cfg.T, spec);
    rep.rows.push_back({m.h(), m.dim(), "strip_integral", fmt::format("p={:g}", cfg.det_p), eps, est.value, est.error,
                        kNaN, ""});
    values.push_back(est.value);
  }
  const double slope = loglog_slope(cfg.kernel_eps, values);
  const double target = m.two_h() + 1.0 / cfg.det_p - 2.0;
  const bool ok = std::abs(slope - target) <= cfg.strip_slope_tolerance;
  rep.rows.push_back({m.h(), m.dim(), "strip_slope", fmt::format("p={:g}", cfg.det_p), 0.0, slope, 0.0, target, flag(ok)});
  add_check(rep, "diagonal strip slope " + h_tag(m.h()), ok,
            fmt::format("slope {:.4f}, expected {:.4f} +- {:g}", slope, target, cfg.strip_slope_tolerance));
}

}  // namespace

StudyReport run_kernel_convergence(const ExperimentConfig& cfg) {
  StudyReport rep;
  rep.study = Study::KernelConvergence;
  const auto spec = quad_spec(cfg);
  for (double h : cfg.h_values) {
    const HurstModel m(h, cfg.d);
    spdlog::info("kernel-convergence: H = {}", h);
    try {
      kernel_pointwise(rep, cfg, m);
      kernel_lq(rep, cfg, m, spec);
      det_ladder(rep, cfg, m, spec, false);
    } catch (const std::exception& e) {
      add_check(rep, "kernel-convergence " + h_tag(h), false, e.what());
    }
  }
  return rep;
}

StudyReport run_det_component(const ExperimentConfig& cfg) {
  StudyReport rep;
  rep.study = Study::DetComponent;
  const auto spec = quad_spec(cfg);
  for (double h : cfg.h_values) {
    const HurstModel m(h, cfg.d);
    spdlog::info("det-component: H = {}", h);
    try {
      det_ladder(rep, cfg, m, spec, true);
      strip_slope(rep, cfg, m, spec);
    } catch (const std::exception& e) {
      add_check(rep, "det-component " + h_tag(h), false, e.what());
    }
  }
  return rep;
}

StudyReport run_lemma_suite(const ExperimentConfig& cfg) {
  StudyReport rep;
  rep.study = Study::LemmaSuite;
  const auto spec = quad_spec(cfg);
  const auto constants = RecordedConstants::load(cfg.constants_path);
  for (double h : cfg.h_values) {
    const HurstModel m(h, cfg.d);
    const std::string tag = h_tag(h);
    spdlog::info("lemma-suite: H = {}", h);
    try {
      std::vector<std::pair<std::string, double>> bounds;
      for (const std::string name : {"growth", "fh_identity", "fh_ratio"}) bounds.emplace_back(name, analytic_constant(m, name));
      for (const auto& name : recorded_bound_names()) bounds.emplace_back(name, constants.get(name, h));
      for (const auto& [name, constant] : bounds) {
        const auto c = check_bound(m, name, constant, cfg.lemma_samples, cfg.seed, cfg.workers);
        rep.rows.push_back({h, m.dim(), "bound_max_ratio", name, static_cast<double>(c.samples), c.max_ratio,
                            static_cast<double>(c.violations), constant, flag(c.passed())});
        add_check(rep, fmt::format("bound {} {}", name, tag), c.passed(),
                  fmt::format("max ratio {:.6g} vs constant {:.6g}, {} violations in {} samples", c.max_ratio, constant,
                              c.violations, c.samples));
      }
      for (double q : cfg.west_q) {
        const std::string key = fmt::format("west_q{:g}", q);
        const double recorded = constants.get(key, h);
        const double a = west_envelope_max(m, q, cfg.west_grid, cfg.seed, spec);
        const double b = west_envelope_max(m, q, cfg.west_grid, cfg.seed + 1, spec);
        const bool bounded = a <= recorded && b <= recorded;
        const double spread = std::abs(a - b) / std::max(a, b);
        const bool stable = spread <= cfg.west_stability;
        rep.rows.push_back({h, m.dim(), "west_max_ratio", key, 0.0, a, b, recorded, flag(bounded && stable)});
        add_check(rep, fmt::format("envelope of ||Lambda||_{:g} {}", q, tag), bounded && stable,
                  fmt::format("grid maxima {:.6g}, {:.6g} (spread {:.3g}), recorded constant {:.6g}", a, b, spread,
                              recorded));
      }
      strip_slope(rep, cfg, m, spec);
    } catch (const std::exception& e) {
      add_check(rep, "lemma-suite " + tag, false, e.what());
    }
  }
  return rep;
}

StudyReport run_bound_scaling(const ExperimentConfig& cfg) {
  StudyReport rep;
  rep.study = Study::BoundScaling;
  const auto spec = quad_spec(cfg);
  std::optional<RecordedConstants> constants;
  try {
    constants = RecordedConstants::load(cfg.constants_path);
  } catch (const std::exception& e) {
    spdlog::warn("bound-scaling: {}; computing the corollary constant", e.what());
  }
  for (double h : cfg.h_values) {
    const HurstModel m(h, cfg.d);
    const double q = corollary_q(m);
    const double p = q / (q - 1.0);
    double K;
    if (constants && constants->has("corollary", h)) {
      K = constants->get("corollary", h);
    } else {
      K = corollary_constant(HurstModel(h, 1), q, spec).value;
    }
    for (const auto& desc : cfg.integrands) {
      const auto y = make_integrand(desc, cfg.d);
      const std::string tag = fmt::format("{} {} d={}", h_tag(h), desc, cfg.d);
      spdlog::info("bound-scaling: {}", tag);
      try {
        const double norm1 = integrand_product_norm(m, y, p);
        const double norm_exponent = (y.is_constant() || y.name() == "sign" ? 0.0 : m.two_h()) + 2.0 / p;
        const double env_exponent = m.two_h() - 2.0 + 2.0 / q;
        std::vector<double> lhs_values, rhs_values;
        bool below = true;
        std::uint64_t seed = cfg.seed;
        for (double v : cfg.v_values) {
          const auto lhs = second_moment_ladder(m, y, ladder_options(cfg, v, v, seed++, y));
          const auto rhs = rhs_isometry(m, y, v, spec);
          const double envelope = norm1 * std::pow(v, norm_exponent) * K * std::pow(v, env_exponent);
          const bool ok = lhs.extrapolated.value <= envelope && rhs.value <= envelope;
          below = below && ok;
          rep.rows.push_back({h, cfg.d, "lhs_squared_norm", desc, v, lhs.extrapolated.value, lhs.extrapolated.std_error,
                              envelope, flag(ok)});
          rep.rows.push_back({h, cfg.d, "rhs_squared_norm", desc, v, rhs.value, rhs.error, envelope, flag(ok)});
          lhs_values.push_back(lhs.extrapolated.value);
          rhs_values.push_back(rhs.value);
        }
        const double slope = loglog_slope(cfg.v_values, lhs_values);
        const double rhs_slope = loglog_slope(cfg.v_values, rhs_values);
        rep.rows.push_back({h, cfg.d, "lhs_slope", desc, 0.0, slope, 0.0, env_exponent, ""});
        rep.rows.push_back({h, cfg.d, "rhs_slope", desc, 0.0, rhs_slope, 0.0, env_exponent, ""});
        add_check(rep, "below corollary envelope " + tag, below,
                  fmt::format("C = {:.6g}, q = {:.4g}, envelope exponent {:.4f}", K, q, env_exponent));
        add_check(rep, "slope above envelope exponent " + tag, slope >= env_exponent,
                  fmt::format("slope {:.4f} >= {:.4f}", slope, env_exponent));
        if (y.is_constant()) {
          const bool ok = std::abs(slope - m.two_h()) <= cfg.slope_tolerance;
          add_check(rep, "constant-integrand slope " + tag, ok,
                    fmt::format("slope {:.4f}, expected {:.4f} +- {:g}", slope, m.two_h(), cfg.slope_tolerance));
        }
      } catch (const std::exception& e) {
        add_check(rep, "bound-scaling " + tag, false, e.what());
      }
    }
  }
  return rep;
}

StudyReport run_study(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.study) {
    case Study::Isometry:
      return run_isometry(cfg);
    case Study::KernelConvergence:
      return run_kernel_convergence(cfg);
    case Study::LemmaSuite:
      return run_lemma_suite(cfg);
    case Study::DetComponent:
      return run_det_component(cfg);
    case Study::BoundScaling:
      return run_bound_scaling(cfg);
  }
  throw std::invalid_argument("unknown study");
}

void write_csv(std::ostream& out, const StudyReport& report, const ExperimentConfig& cfg) {
  const std::string prefix =
      fmt::format("{},{},{},{}", study_name(report.study), cfg.seed, build_id(), config_hash(cfg));
  const auto num = [](double v) { return std::isnan(v) ? std::string() : g17(v); };
  out << "#schema=1\n";
  out << "study,seed,build_id,config_hash,H,d,quantity,label,x,value,std_error,reference,pass\n";
  for (const auto& r : report.rows) {
    out << prefix << ',' << num(r.h) << ',' << r.d << ',' << r.quantity << ",\"" << r.label << "\"," << num(r.x) << ','
        << num(r.value) << ',' << num(r.std_error) << ',' << num(r.reference) << ',' << r.pass << '\n';
  }
}

void write_summary(std::ostream& out, const StudyReport& report, const ExperimentConfig& cfg) {
  out << "study " << study_name(report.study) << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "build " << build_id() << "\n";
  out << "config " << config_hash(cfg) << "\n";
  for (const auto& c : report.checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  out << (report.all_passed() ? "ALL PASS" : "SOME CHECKS FAILED") << "\n";
}

void write_outputs(const StudyReport& report, const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / (study_name(report.study) + ".csv"));
  if (!csv) throw std::runtime_error("cannot write to " + dir.string());
  write_csv(csv, report, cfg);
  std::ofstream summary(dir / "summary.txt");
  write_summary(summary, report, cfg);
}

}  // namespace fbmiso
