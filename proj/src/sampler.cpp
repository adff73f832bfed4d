#include "fbmiso/sampler.hpp"

#include <fftw3.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "fbmiso/covariance.hpp"
#include "fbmiso/rng.hpp"

namespace fbmiso {

std::vector<double> uniform_grid(std::size_t n, double dt) {
  if (n == 0 || !(dt > 0.0)) throw std::invalid_argument("uniform grid needs n >= 1 and dt > 0");
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = static_cast<double>(k) * dt;
  return g;
}

FbmPath PathSampler::sample(std::uint64_t seed, std::uint64_t index) const {
  auto two = sample_two(seed, index / 2);
  return std::move(two[index % 2]);
}

// ---------------------------------------------------------------- Cholesky

CholeskySampler::CholeskySampler(const HurstModel& m, std::vector<double> grid) : model_(m), grid_(std::move(grid)) {
  if (grid_.empty()) throw std::invalid_argument("empty grid");
  if (!(grid_.front() >= 0.0)) throw std::invalid_argument("grid times must be nonnegative");
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (!(grid_[k] > grid_[k - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }
  offset_ = grid_.front() == 0.0 ? 1 : 0;
  const std::size_t n = grid_.size() - offset_;
  if (n > kMaxPoints) throw std::invalid_argument("grid too large for the dense Cholesky sampler");
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cov(i, j) = cov(j, i) = cov_R(m, grid_[i + offset_], grid_[j + offset_]);
    }
  }
  if (n == 0) return;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    jitter_ = 1e-12 * cov.diagonal().maxCoeff();
    cov.diagonal().array() += jitter_;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("Cholesky factorisation failed after jitter");
    spdlog::warn("Cholesky sampler needed diagonal jitter {:.3g}", jitter_);
  }
  factor_ = llt.matrixL();
}

FbmPath CholeskySampler::draw(std::uint64_t seed, std::uint64_t index) const {
  const int d = model_.dim();
  const std::size_t n = grid_.size() - offset_;
  FbmPath p;
  p.grid = grid_;
  p.seed = seed;
  p.index = index;
  p.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid_.size()), d);
  Eigen::VectorXd z(n);
  for (int c = 0; c < d; ++c) {
    NormalStream rng(seed, index * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(c));
    rng.fill(z.data(), z.data() + n);
    p.values.col(c).tail(n) = factor_.triangularView<Eigen::Lower>() * z;
  }
  return p;
}

std::array<FbmPath, 2> CholeskySampler::sample_two(std::uint64_t seed, std::uint64_t unit) const {
  return {draw(seed, 2 * unit), draw(seed, 2 * unit + 1)};
}

FbmPath sample_path_cholesky(const HurstModel& m, const std::vector<double>& grid, std::uint64_t seed,
                             std::uint64_t index) {
  return CholeskySampler(m, grid).sample(seed, index);
}

// --------------------------------------------------------------- circulant

namespace {

double fgn_autocov(const HurstModel& m, double dt, std::size_t k) {
  const double p = m.two_h();
  const double kk = static_cast<double>(k);
  const double base = 0.5 * (detail::pow_abs(kk + 1.0, p) - 2.0 * detail::pow_abs(kk, p) + detail::pow_abs(kk - 1.0, p));
  return detail::pow_abs(dt, p) * base;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

CirculantSampler::CirculantSampler(const HurstModel& m, std::size_t n, double dt)
    : model_(m), n_(n), dt_(dt), grid_(uniform_grid(n, dt)) {
  const std::size_t half = std::bit_ceil(n);
  size_ = 2 * half;
  FftwBuffer buf(size_);
  {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(size_), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (plan_ == nullptr) throw std::runtime_error("FFTW planning failed");
  for (std::size_t j = 0; j < size_; ++j) {
    buf.data[j][0] = fgn_autocov(m, dt, j <= half ? j : size_ - j);
    buf.data[j][1] = 0.0;
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), buf.data, buf.data);
  double max_eig = 0.0;
  double min_eig = 0.0;
  for (std::size_t j = 0; j < size_; ++j) {
    max_eig = std::max(max_eig, buf.data[j][0]);
    min_eig = std::min(min_eig, buf.data[j][0]);
  }
  min_rel_eig_ = min_eig / max_eig;
  if (min_rel_eig_ < -1e-10) {
    spdlog::warn("circulant embedding has negative eigenvalue {:.3g} (relative); using the Cholesky sampler",
                 min_rel_eig_);
    fallback_ = std::make_unique<CholeskySampler>(m, grid_);
    return;
  }
  sqrt_eig_.resize(size_);
  for (std::size_t j = 0; j < size_; ++j) {
    sqrt_eig_[j] = std::sqrt(std::max(buf.data[j][0], 0.0) / static_cast<double>(size_));
  }
}

CirculantSampler::~CirculantSampler() {
  if (plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

void CirculantSampler::noise_pair(std::uint64_t seed, std::uint64_t stream, double* re, double* im) const {
  FftwBuffer buf(size_);
  NormalStream rng(seed, stream);
  for (std::size_t j = 0; j < size_; ++j) {
    buf.data[j][0] = sqrt_eig_[j] * rng.next();
    buf.data[j][1] = sqrt_eig_[j] * rng.next();
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), buf.data, buf.data);
  for (std::size_t j = 0; j < n_; ++j) {
    re[j] = buf.data[j][0];
    im[j] = buf.data[j][1];
  }
}

std::array<FbmPath, 2> CirculantSampler::sample_two(std::uint64_t seed, std::uint64_t unit) const {
  if (fallback_) return fallback_->sample_two(seed, unit);
  const int d = model_.dim();
  std::array<FbmPath, 2> out;
  for (int k = 0; k < 2; ++k) {
    out[k].grid = grid_;
    out[k].seed = seed;
    out[k].index = 2 * unit + static_cast<std::uint64_t>(k);
    out[k].values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_ + 1), d);
  }
  // series g = path * d + coordinate; FFT stream g / 2 carries series g and g + 1
  std::vector<double> re(n_), im(n_);
  const std::uint64_t first_series = 2 * unit * static_cast<std::uint64_t>(d);
  for (int f = 0; f < d; ++f) {
    const std::uint64_t g = first_series + 2 * static_cast<std::uint64_t>(f);
    noise_pair(seed, g / 2, re.data(), im.data());
    for (int part = 0; part < 2; ++part) {
      const std::uint64_t series = g + static_cast<std::uint64_t>(part);
      const int path = static_cast<int>(series / static_cast<std::uint64_t>(d) - 2 * unit);
      const int coord = static_cast<int>(series % static_cast<std::uint64_t>(d));
      const std::vector<double>& inc = part == 0 ? re : im;
      auto col = out[path].values.col(coord);
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        acc += inc[j];
        col(static_cast<Eigen::Index>(j + 1)) = acc;
      }
    }
  }
  return out;
}

FbmPath sample_path_circulant(const HurstModel& m, std::size_t n, double dt, std::uint64_t seed, std::uint64_t index) {
  return CirculantSampler(m, n, dt).sample(seed, index);
}

// -------------------------------------------------------------------- pairs

PairLaw pair_law(const HurstModel& m, const SimplexPoint& p) {
  PairLaw law;
  law.s = p.s();
  law.t = p.t();
  const double r = cov_R(m, p.s(), p.t());
  law.sigma << variance_v(m, p.s()), r, r, variance_v(m, p.t());
  return law;
}

PairStream::PairStream(const HurstModel& m, const SimplexPoint& p, std::uint64_t seed)
    : model_(m), point_(p), seed_(seed) {
  const auto op = ordered_powers(m, p.lo(), p.gap());
  if (!(op.theta > 0.0)) throw std::domain_error("pair law is degenerate");
  const double root = std::sqrt(op.lo2h);
  l11_ = root;
  l21_ = op.phi / root;
  l22_ = std::sqrt(op.theta) / root;
}

PairSample PairStream::from_normals(const Eigen::VectorXd& z) const {
  const int d = model_.dim();
  PairSample x{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  for (int c = 0; c < d; ++c) {
    const double lo = l11_ * z(2 * c);
    const double hi = lo + l21_ * z(2 * c) + l22_ * z(2 * c + 1);
    x.b_s(c) = point_.ordered() ? lo : hi;
    x.b_t(c) = point_.ordered() ? hi : lo;
  }
  return x;
}

PairSample PairStream::draw(std::uint64_t k) const {
  NormalStream rng(seed_, k);
  Eigen::VectorXd z(2 * model_.dim());
  rng.fill(z.data(), z.data() + z.size());
  return from_normals(z);
}

std::vector<PairSample> sample_pair(const HurstModel& m, const SimplexPoint& p, std::size_t count, std::uint64_t seed) {
  PairStream stream(m, p, seed);
  std::vector<PairSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(stream.draw(k));
  return out;
}

// ---------------------------------------------------------------- binary io

namespace {

static_assert(std::endian::native == std::endian::little, "binary path format assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  out.write(bytes, 8);
}

template <class T>
T get(std::istream& in) {
  char bytes[8];
  in.read(bytes, 8);
  if (!in) throw std::runtime_error("truncated path dump");
  T v;
  std::memcpy(&v, bytes, 8);
  return v;
}

}  // namespace

void write_path_binary(std::ostream& out, const FbmPath& path, double h, double dt) {
  const auto rows = static_cast<std::uint64_t>(path.values.rows());
  if (rows == 0) throw std::invalid_argument("empty path");
  put<double>(out, h);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(path.values.cols()));
  put<std::uint64_t>(out, rows - 1);
  put<double>(out, dt);
  put<std::uint64_t>(out, path.seed);
  for (Eigen::Index i = 0; i < path.values.rows(); ++i) {
    for (Eigen::Index c = 0; c < path.values.cols(); ++c) put<double>(out, path.values(i, c));
  }
  if (!out) throw std::runtime_error("failed to write path dump");
}

PathDump read_path_binary(std::istream& in) {
  PathDump p;
  p.h = get<double>(in);
  p.d = get<std::uint64_t>(in);
  p.n = get<std::uint64_t>(in);
  p.dt = get<double>(in);
  p.seed = get<std::uint64_t>(in);
  if (p.d == 0 || p.d > 1024 || p.n > (std::uint64_t{1} << 32)) throw std::runtime_error("corrupt path dump header");
  p.values.resize(static_cast<Eigen::Index>(p.n + 1), static_cast<Eigen::Index>(p.d));
  for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
    for (Eigen::Index c = 0; c < p.values.cols(); ++c) p.values(i, c) = get<double>(in);
  }
  return p;
}

}  // namespace fbmiso
