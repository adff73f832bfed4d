#include "fbmiso/integrand.hpp"

#include <sstream>
#include <stdexcept>
#include <vector>

namespace fbmiso {

Integrand Integrand::constant(const Eigen::VectorXd& c) {
  std::ostringstream name;
  name << "constant:";
  for (Eigen::Index i = 0; i < c.size(); ++i) name << (i ? "," : "") << c(i);
  auto out = separable(name.str(), static_cast<int>(c.size()), [c](int i, double, double) { return c(i); }, 0);
  out.constant_ = true;
  return out;
}

Integrand Integrand::identity(int d) {
  return separable("identity", d, [](int, double, double x) { return x; }, 1);
}

Integrand Integrand::sign(int d) {
  return separable(
      "sign", d, [](int, double, double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }, -1, true);
}

Integrand Integrand::separable(std::string name, int d, Coordinate f, int degree, bool jump_at_zero) {
  if (d < 1) throw std::invalid_argument("integrand dimension must be >= 1");
  Integrand g;
  g.name_ = std::move(name);
  g.d_ = d;
  g.coord_ = std::move(f);
  g.degree_ = degree;
  g.jump_ = jump_at_zero;
  return g;
}

Integrand Integrand::general(std::string name, int d, Full g, int degree) {
  if (d < 1) throw std::invalid_argument("integrand dimension must be >= 1");
  Integrand out;
  out.name_ = std::move(name);
  out.d_ = d;
  out.full_ = std::move(g);
  out.degree_ = degree;
  return out;
}

Eigen::VectorXd Integrand::operator()(double t, const Eigen::VectorXd& x) const {
  if (x.size() != d_) throw std::invalid_argument("integrand argument has the wrong dimension");
  if (full_) return full_(t, x);
  Eigen::VectorXd out(d_);
  for (int i = 0; i < d_; ++i) out(i) = coord_(i, t, x(i));
  return out;
}

double Integrand::coordinate(int i, double t, double xi) const {
  if (!coord_) throw std::logic_error("integrand is not separable");
  return coord_(i, t, xi);
}

Integrand make_integrand(const std::string& descriptor, int d) {
  if (descriptor == "identity") return Integrand::identity(d);
  if (descriptor == "sign") return Integrand::sign(d);
  if (descriptor == "constant") return Integrand::constant(Eigen::VectorXd::Ones(d));
  const std::string prefix = "constant:";
  if (descriptor.rfind(prefix, 0) == 0) {
    std::vector<double> values;
    std::stringstream ss(descriptor.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    if (values.size() == 1) values.assign(static_cast<std::size_t>(d), values[0]);
    if (values.size() != static_cast<std::size_t>(d)) {
      throw std::invalid_argument("constant integrand needs 1 or d values: " + descriptor);
    }
    return Integrand::constant(Eigen::Map<Eigen::VectorXd>(values.data(), d));
  }
  throw std::invalid_argument("unknown integrand descriptor: " + descriptor);
}

}  // namespace fbmiso
