#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbmiso/kernel.hpp"
#include "fbmiso/model.hpp"

namespace fbmiso {

/// One d-dimensional sample path on a grid; row k holds B at grid[k].
struct FbmPath {
  std::vector<double> grid;
  Eigen::MatrixXd values;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Uniform grid k * dt, k = 0..n.
std::vector<double> uniform_grid(std::size_t n, double dt);

/// Path samplers hand out paths two at a time: paths 2j and 2j+1 share the
/// random draws of unit j.  Path k is fully determined by (seed, k).
class PathSampler {
 public:
  virtual ~PathSampler() = default;
  virtual std::array<FbmPath, 2> sample_two(std::uint64_t seed, std::uint64_t unit) const = 0;
  virtual const std::vector<double>& grid() const = 0;
  virtual std::string name() const = 0;
  FbmPath sample(std::uint64_t seed, std::uint64_t index) const;
};

/// Exact sampler by dense Cholesky factorisation of the grid covariance.
class CholeskySampler final : public PathSampler {
 public:
  static constexpr std::size_t kMaxPoints = 4096;

  CholeskySampler(const HurstModel& m, std::vector<double> grid);
  std::array<FbmPath, 2> sample_two(std::uint64_t seed, std::uint64_t unit) const override;
  const std::vector<double>& grid() const override { return grid_; }
  std::string name() const override { return "cholesky"; }
  /// Diagonal jitter that was needed to factorise (0 if none).
  double jitter() const { return jitter_; }

 private:
  FbmPath draw(std::uint64_t seed, std::uint64_t index) const;

  HurstModel model_;
  std::vector<double> grid_;
  std::size_t offset_ = 0;  // 1 when grid starts at 0
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

/// Circulant embedding of fractional Gaussian noise on k * dt, k = 0..n.  The
/// real and imaginary parts of one FFT give two independent series.
class CirculantSampler final : public PathSampler {
 public:
  CirculantSampler(const HurstModel& m, std::size_t n, double dt);
  ~CirculantSampler() override;
  CirculantSampler(const CirculantSampler&) = delete;
  CirculantSampler& operator=(const CirculantSampler&) = delete;

  std::array<FbmPath, 2> sample_two(std::uint64_t seed, std::uint64_t unit) const override;
  const std::vector<double>& grid() const override { return grid_; }
  std::string name() const override { return fallback_ ? "circulant->cholesky" : "circulant"; }
  /// True when the embedding had negative eigenvalues and the Cholesky sampler is used instead.
  bool fell_back() const { return static_cast<bool>(fallback_); }
  /// Most negative embedding eigenvalue relative to the largest one.
  double min_relative_eigenvalue() const { return min_rel_eig_; }

 private:
  void noise_pair(std::uint64_t seed, std::uint64_t stream, double* re, double* im) const;

  HurstModel model_;
  std::size_t n_;
  double dt_;
  std::size_t size_;  // embedding length
  std::vector<double> grid_;
  std::vector<double> sqrt_eig_;
  double min_rel_eig_ = 0.0;
  void* plan_ = nullptr;
  std::unique_ptr<CholeskySampler> fallback_;
};

FbmPath sample_path_cholesky(const HurstModel& m, const std::vector<double>& grid, std::uint64_t seed,
                             std::uint64_t index = 0);
FbmPath sample_path_circulant(const HurstModel& m, std::size_t n, double dt, std::uint64_t seed,
                              std::uint64_t index = 0);

/// Per-coordinate law of (B_s, B_t).
struct PairLaw {
  double s = 0.0;
  double t = 0.0;
  Eigen::Matrix2d sigma;
};
PairLaw pair_law(const HurstModel& m, const SimplexPoint& p);

/// Stream of exact draws of (B_s, B_t); draw k uses substream k of the seed.
class PairStream {
 public:
  PairStream(const HurstModel& m, const SimplexPoint& p, std::uint64_t seed);
  PairSample draw(std::uint64_t k) const;
  PairSample next() { return draw(count_++); }
  /// Draw k computed from given standard normals z (2 per coordinate).
  PairSample from_normals(const Eigen::VectorXd& z) const;

 private:
  HurstModel model_;
  SimplexPoint point_;
  std::uint64_t seed_;
  std::uint64_t count_ = 0;
  double l11_, l21_, l22_;
};

std::vector<PairSample> sample_pair(const HurstModel& m, const SimplexPoint& p, std::size_t count,
                                    std::uint64_t seed);

/// Binary dump: header of five little-endian 8-byte fields (H f64, d u64,
/// n u64, dt f64, seed u64) followed by (n+1)*d f64 values, row-major.
void write_path_binary(std::ostream& out, const FbmPath& path, double h, double dt);
struct PathDump {
  double h = 0.0;
  std::uint64_t d = 0;
  std::uint64_t n = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd values;
};
PathDump read_path_binary(std::istream& in);

}  // namespace fbmiso
