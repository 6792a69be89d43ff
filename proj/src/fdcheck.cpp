#include "mcopt/fdcheck.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcopt/error.hpp"

namespace mcopt::fd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double eval(const ScalarFn& f, const Vec& x) {
  double v;
  try {
    v = f(x);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutsideDomain) throw Error(ErrorCode::StencilOutsideDomain, e.what());
    throw;
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::StencilOutsideDomain, "non-finite value on stencil");
  return v;
}

double scale_of(const Vec& x) { return 1.0 + (x.size() ? x.cwiseAbs().maxCoeff() : 0.0); }

}  // namespace

double default_step(int order, const Vec& x) {
  return std::pow(kEps, 1.0 / (order + 2)) * scale_of(x);
}

Vec fd_grad(const ScalarFn& f, const Vec& x, double h) {
  if (h <= 0.0) h = std::cbrt(kEps) * scale_of(x);
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    const double fp = eval(f, xp);
    xp(i) = x(i) - h;
    const double fm = eval(f, xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double fd_dirk(const ScalarFn& f, const Vec& x, const Vec& d, int order, double h) {
  const double dn = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  if (!(dn > 0.0)) return 0.0;
  if (h <= 0.0) h = default_step(order, x) / dn;
  auto at = [&](double t) { return eval(f, x + t * d); };
  switch (order) {
    case 1:
      return (at(h) - at(-h)) / (2.0 * h);
    case 2:
      return (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
    case 3:
      return (at(2 * h) - 2.0 * at(h) + 2.0 * at(-h) - at(-2 * h)) / (2.0 * h * h * h);
    case 4:
      return (at(2 * h) - 4.0 * at(h) + 6.0 * at(0.0) - 4.0 * at(-h) + at(-2 * h)) /
             (h * h * h * h);
    default:
      throw Error(ErrorCode::InvalidConfig, "fd_dirk order must be 1..4, got " + std::to_string(order));
  }
}

Vec fd_jvp(const std::function<Vec(const Vec&)>& g, const Vec& x, const Vec& d, double h) {
  const double dn = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  if (!(dn > 0.0)) return Vec::Zero(g(x).size());
  if (h <= 0.0) h = std::cbrt(kEps) * scale_of(x) / dn;
  auto at = [&](double t) {
    try {
      Vec v = g(x + t * d);
      if (!v.allFinite()) throw Error(ErrorCode::StencilOutsideDomain, "non-finite value on stencil");
      return v;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::OutsideDomain) throw Error(ErrorCode::StencilOutsideDomain, e.what());
      throw;
    }
  };
  // fourth-order stencil
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

}  // namespace mcopt::fd
