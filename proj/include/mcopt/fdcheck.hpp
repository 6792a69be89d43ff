#pragma once

#include <functional>

#include "mcopt/linalg.hpp"

namespace mcopt::fd {

using ScalarFn = std::function<double(const Vec&)>;

/// Step used when the caller passes h <= 0.
double default_step(int order, const Vec& x);

/// Central-difference gradient. Default h = eps^(1/3) (1 + |x|_inf).
Vec fd_grad(const ScalarFn& f, const Vec& x, double h = -1.0);

/// k-th directional derivative D^k f(x)[d]^k for k in {1,2,3,4}.
/// Default h = eps^(1/(k+2)) (1 + |x|_inf) / |d|_inf.
double fd_dirk(const ScalarFn& f, const Vec& x, const Vec& d, int order, double h = -1.0);

/// Directional derivative of a vector map, (g(x + h d) - g(x - h d)) / 2h.
Vec fd_jvp(const std::function<Vec(const Vec&)>& g, const Vec& x, const Vec& d, double h = -1.0);

}  // namespace mcopt::fd
