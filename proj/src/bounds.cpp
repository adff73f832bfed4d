#include "fbmiso/bounds.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fbmiso/covariance.hpp"
#include "fbmiso/gauss_rules.hpp"
#include "fbmiso/parallel.hpp"
#include "fbmiso/regression.hpp"
#include "fbmiso/rng.hpp"

namespace fbmiso {

using detail::pow_abs;

namespace {

std::string h_key(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", h);
  return buf;
}

boost::property_tree::ptree::path_type key_path(const std::string& section, const std::string& key) {
  return {section + "/" + key, '/'};
}

double log_uniform(double u, double lo, double hi) { return lo * std::pow(hi / lo, u); }

// ordered pair in the unit simplex: half uniform, half log-uniform in lo and gap
struct Pair {
  double lo, gap;
};

Pair sample_pair_point(UniformStream& u) {
  const double pick = u.next();
  if (pick < 0.5) {
    double a = u.next(), b = u.next();
    if (a > b) std::swap(a, b);
    const double gap = std::max(b - a, 1e-9);
    return {a, std::min(gap, 1.0 - a)};
  }
  const double lo = log_uniform(u.next(), 1e-6, 1.0);
  const double gap = (1.0 - lo) * log_uniform(u.next(), 1e-6, 1.0);
  return {lo, gap};
}

// bounds attained exactly (fh_ratio at t = 2s) may be exceeded by rounding
constexpr double kRoundingSlack = 1e-12;

constexpr double kScaleLadder[] = {1e-1, 1e-2, 1e-3, 1e-4};

double ladder_scale(UniformStream& u) { return kScaleLadder[std::min(3, static_cast<int>(u.next() * 4.0))]; }

}  // namespace

RecordedConstants RecordedConstants::load(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error("cannot read recorded constants: " + std::string(e.what()));
  }
  RecordedConstants rc;
  rc.margin = pt.get<double>(key_path("meta", "margin"), 1.5);
  rc.samples = pt.get<std::size_t>(key_path("meta", "samples"), 0);
  rc.seed = pt.get<std::uint64_t>(key_path("meta", "seed"), 0);
  for (const auto& [section, tree] : pt) {
    if (section == "meta") continue;
    for (const auto& [key, value] : tree) rc.values_[{section, key}] = value.get_value<double>();
  }
  return rc;
}

void RecordedConstants::save(const std::string& path) const {
  boost::property_tree::ptree pt;
  pt.put(key_path("meta", "margin"), margin);
  pt.put(key_path("meta", "samples"), samples);
  pt.put(key_path("meta", "seed"), seed);
  for (const auto& [k, v] : values_) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    pt.put(key_path(k.first, k.second), std::string(buf));
  }
  boost::property_tree::write_ini(path, pt);
}

double RecordedConstants::get(const std::string& name, double h) const {
  const auto it = values_.find({name, h_key(h)});
  if (it == values_.end()) throw std::out_of_range("no recorded constant for " + name + " at H = " + h_key(h));
  return it->second;
}

void RecordedConstants::set(const std::string& name, double h, double value) { values_[{name, h_key(h)}] = value; }

bool RecordedConstants::has(const std::string& name, double h) const {
  return values_.count({name, h_key(h)}) > 0;
}

const std::vector<std::string>& recorded_bound_names() {
  static const std::vector<std::string> names{"grdet", "ddelta", "T1", "T2", "i11i22", "i12i21"};
  return names;
}

double envelope_T1(const HurstModel& m, double s, double t) {
  const double h = m.h();
  const double r = t - s;
  return 1.0 / t + pow_abs(s, h - 1.0) * pow_abs(r, h - 1.0) + pow_abs(s, 1.0 - 2.0 * h) * (pow_abs(t, 2.0 * h - 2.0) + 1.0) +
         pow_abs(r, 2.0 * h - 2.0);
}

double envelope_T2(const HurstModel& m, double s, double t) { return envelope_T1(m, s, t) + 1.0; }

double envelope_i11i22(const HurstModel& m, double s, double t) {
  const double h = m.h();
  const double r = t - s;
  return pow_abs(s, h - 1.0) * pow_abs(r, h - 1.0) + pow_abs(r, 2.0 * h - 2.0) + (1.0 / t + 1.0) +
         pow_abs(r, h - 1.0) * (1.0 + pow_abs(t, -h));
}

double envelope_i12i21(const HurstModel& m, double s, double t) { return envelope_i11i22(m, s, t); }

double envelope_west(const HurstModel& m, double s, double t) {
  const double h = m.h();
  const double r = std::abs(t - s);
  return pow_abs(r, 2.0 * h - 2.0) + pow_abs(std::min(s, t), h - 1.0) * pow_abs(r, h - 1.0);
}

BoundSampler::BoundSampler(const HurstModel& m, std::uint64_t seed) : m_(m), seed_(seed) {}

double BoundSampler::ratio(const std::string& name, std::size_t k) const {
  UniformStream u(seed_, k);
  const double h = m_.h();
  if (name == "growth") {
    double x;
    if (u.next() < 0.5) {
      x = log_uniform(u.next(), 1e-8, 1e3);
      if (u.next() < 0.5) x = -x;
    } else {
      x = -1e3 + 2e3 * u.next();
    }
    if (x == 0.0) return 0.0;
    return std::abs(vartheta1(m_, x)) / (4.0 * h * std::abs(x));
  }
  if (name == "fh_identity" || name == "fh_ratio") {
    const auto [lo, gap] = sample_pair_point(u);
    const auto op = ordered_powers(m_, lo, gap);
    const double a = A_factor(m_, SimplexPoint::from_gap(lo, gap));
    if (name == "fh_identity") return std::abs(op.theta - op.gap2h * a) / op.theta;
    return op.lo2h / std::abs(a);
  }
  if (name == "grdet") {
    const double small = log_uniform(u.next(), 1e-6, 1.0);
    const double large = u.next() < 0.5 ? log_uniform(u.next(), small, 1.0) : log_uniform(u.next(), 1.0, 1e3);
    double x = small, y = large;
    if (u.next() < 0.5) std::swap(x, y);
    return std::abs(Phi_det(m_, x, y) / (x * y));
  }
  if (name == "ddelta") {
    const auto [lo, gap] = sample_pair_point(u);
    const double delta = log_uniform(u.next(), 1e-6, 1.0);
    const double t = lo + gap;
    return std::abs(d_func_ordered(m_, delta, lo, gap)) / (delta * lo * (1.0 / t + 1.0));
  }
  const auto [lo, gap] = sample_pair_point(u);
  const double eps = ladder_scale(u);
  const double delta = ladder_scale(u);
  const auto op = ordered_powers(m_, lo, gap);
  const auto eta = eta_finite_ordered(m_, eps, delta, op);
  const double s = lo, t = lo + gap;
  const double scale = 1.0 / (eps * delta);
  if (name == "T1") return std::abs(eta.c12 * eta.c22 * scale) * op.gap2h / envelope_T1(m_, s, t);
  if (name == "T2") return std::abs(eta.c11 * eta.c21 * scale) * op.lo2h / envelope_T2(m_, s, t);
  const double mixed = std::sqrt(op.lo2h * op.gap2h);
  if (name == "i11i22") return std::abs(eta.c11 * eta.c22 * scale) * mixed / envelope_i11i22(m_, s, t);
  if (name == "i12i21") return std::abs(eta.c12 * eta.c21 * scale) * mixed / envelope_i12i21(m_, s, t);
  throw std::invalid_argument("unknown bound " + name);
}

double analytic_constant(const HurstModel& m, const std::string& name) {
  if (name == "growth") return 1.0;
  if (name == "fh_identity") return 1e-10;
  if (name == "fh_ratio") return std::pow(2.0, 2.0 - m.two_h()) / (4.0 - std::pow(2.0, m.two_h()));
  throw std::invalid_argument("bound " + name + " has no closed-form constant");
}

BoundCheck check_bound(const HurstModel& m, const std::string& name, double constant, std::size_t n,
                       std::uint64_t seed, int workers) {
  const BoundSampler sampler(m, seed);
  std::vector<double> ratios(n);
  parallel_for(n, workers, [&](std::size_t k) { ratios[k] = sampler.ratio(name, k); });
  BoundCheck out;
  out.name = name;
  out.h = m.h();
  out.samples = n;
  out.constant = constant;
  for (double r : ratios) {
    if (!std::isfinite(r)) {
      ++out.violations;
      continue;
    }
    out.max_ratio = std::max(out.max_ratio, r);
    if (r > constant * (1.0 + kRoundingSlack)) ++out.violations;
  }
  return out;
}

double west_envelope_max(const HurstModel& m, double q, int n, std::uint64_t seed, const QuadratureSpec& spec) {
  if (n < 1) throw std::invalid_argument("grid size must be positive");
  std::vector<double> ratios(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  parallel_for(ratios.size(), spec.workers, [&](std::size_t k) {
    UniformStream u(seed, k);
    const std::size_t i = k / static_cast<std::size_t>(n);
    const std::size_t j = k % static_cast<std::size_t>(n);
    double s, t;
    do {
      s = (static_cast<double>(i) + u.next()) / n;
      t = (static_cast<double>(j) + u.next()) / n;
    } while (std::abs(t - s) < 1e-9);
    QuadratureSpec local = spec;
    local.workers = 1;
    const double norm = lq_norm_Lambda(m, SimplexPoint::from_times(s, t), q, local).value;
    ratios[k] = norm / envelope_west(m, s, t);
  });
  return *std::max_element(ratios.begin(), ratios.end());
}

double corollary_q(const HurstModel& m) {
  const double qmax = std::min(1.0 / (m.two_h() - 1.0), 1.0 / (2.0 - m.two_h()));
  return 0.5 * (1.0 + qmax);
}

QuadEstimate corollary_constant(const HurstModel& m, double q, const QuadratureSpec& spec) {
  auto est = lambda_q_mass(m, q, 1.0, spec);
  const double k = std::pow(est.value, 1.0 / q);
  est.error = k / (q * est.value) * est.error;
  for (double& v : est.levels) v = std::pow(v, 1.0 / q);
  est.value = k;
  return est;
}

double integrand_product_norm(const HurstModel& m, const Integrand& y, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  if (y.dim() != m.dim()) throw std::invalid_argument("integrand dimension does not match the model");
  const std::string& name = y.name();
  if (y.is_constant()) {
    const double c2 = y(0.0, Eigen::VectorXd::Zero(m.dim())).squaredNorm();
    return c2;
  }
  if (name == "sign") return static_cast<double>(m.dim());
  if (name == "identity" && m.dim() == 1) {
    const Rule1D rule = composite_rule(geometric_breakpoints(0.0, 1.0, 0.15, 12, 4), 10);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      for (std::size_t j = 0; j < rule.size(); ++j) {
        const double s = rule.x[i], t = rule.x[j];
        // B_s = a.z, B_t = b.z with z standard normal in R^2
        const double vs = variance_v(m, s);
        const double r = cov_R(m, s, t);
        const Eigen::Vector2d a(std::sqrt(vs), 0.0);
        const Eigen::Vector2d b(r / std::sqrt(vs), std::sqrt(std::max(0.0, variance_v(m, t) - r * r / vs)));
        const Eigen::Matrix2d outer = a * b.transpose();
        total += rule.w[i] * rule.w[j] * abs_moment_quadratic(0.5 * (outer + outer.transpose()), 0.0, p);
      }
    }
    return std::pow(total, 1.0 / p);
  }
  throw std::invalid_argument("no product norm available for integrand " + name);
}

}  // namespace fbmiso
