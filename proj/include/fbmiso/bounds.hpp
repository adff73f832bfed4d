#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fbmiso/integrand.hpp"
#include "fbmiso/model.hpp"
#include "fbmiso/quadrature.hpp"

namespace fbmiso {

/// Outcome of checking value <= constant * envelope on sampled points.
struct BoundCheck {
  std::string name;
  double h = 0.0;
  std::size_t samples = 0;
  double constant = 1.0;
  double max_ratio = 0.0;  // max of value / envelope, before the constant
  std::size_t violations = 0;
  bool passed() const { return samples > 0 && violations == 0; }
};

/// Sampled sup constants for the bounds whose constant is only known to be
/// finite, keyed by bound name and H.  Stored as INI: one section per bound,
/// one `H = constant` line per exponent, plus a [meta] section.
class RecordedConstants {
 public:
  static RecordedConstants load(const std::string& path);
  void save(const std::string& path) const;

  /// Recorded constant (sample sup times margin); throws when absent.
  double get(const std::string& name, double h) const;
  void set(const std::string& name, double h, double value);
  bool has(const std::string& name, double h) const;

  double margin = 1.5;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

 private:
  std::map<std::pair<std::string, std::string>, double> values_;
};

/// Names of the bounds that use recorded constants.
const std::vector<std::string>& recorded_bound_names();

/// Envelopes in (s, t) with 0 < s < t.
double envelope_T1(const HurstModel& m, double s, double t);
double envelope_T2(const HurstModel& m, double s, double t);
double envelope_i11i22(const HurstModel& m, double s, double t);
double envelope_i12i21(const HurstModel& m, double s, double t);
/// |t - s|^(2H-2) + (s ^ t)^(H-1) |t - s|^(H-1).
double envelope_west(const HurstModel& m, double s, double t);

/// Raw sampled ratio value / envelope for a named bound at sample index k.
/// Names: growth, fh_identity, fh_ratio, grdet, ddelta, T1, T2, i11i22, i12i21.
struct BoundSampler {
  BoundSampler(const HurstModel& m, std::uint64_t seed);
  double ratio(const std::string& name, std::size_t k) const;

 private:
  HurstModel m_;
  std::uint64_t seed_;
};

/// Runs one named bound on n samples against `constant`.
BoundCheck check_bound(const HurstModel& m, const std::string& name, double constant, std::size_t n,
                       std::uint64_t seed, int workers = 0);

/// Fixed constants: growth 1, fh_identity 1e-10, fh_ratio 2^(2-2H)/(4-2^2H).
double analytic_constant(const HurstModel& m, const std::string& name);

/// Max of ||Lambda(s,t)||_q / envelope_west over one jittered point per cell
/// of an n x n grid on [0,1]^2 (cells on the diagonal included).
double west_envelope_max(const HurstModel& m, double q, int n, std::uint64_t seed, const QuadratureSpec& spec);

/// Constant K = (int_{[0,1]^2} E|Lambda|^q)^(1/q) such that
/// ||int_0^v c dB||^2 <= |c|^2 K v^(2H - 2 + 2/q); q = (1 + qmax) / 2 by default.
double corollary_q(const HurstModel& m);
QuadEstimate corollary_constant(const HurstModel& m, double q, const QuadratureSpec& spec);

/// (int_{[0,1]^2} E|Y_s (x) Y_t|^p ds dt)^(1/p) with the Frobenius norm, for
/// constant and sign integrands and for the identity when d = 1.  On [0,v]^2
/// the constant and sign values scale by v^(2/p), the identity by v^(2H + 2/p).
double integrand_product_norm(const HurstModel& m, const Integrand& y, double p);

}  // namespace fbmiso
