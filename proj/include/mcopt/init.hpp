#pragma once

#include <utility>

#include "mcopt/model.hpp"

namespace mcopt {

/// [min(min_i nu_i/<s_i,x_i>, nu/<s,x>), max_i nu_i/<s_i,x_i>].
std::pair<double, double> gamma_bracket(const Problem& p, const Iterate& u);

/// vbar_i(gamma): 0 when gamma <= zeta_i(0)/nu_i, otherwise the root of
/// zeta_i(tau) = gamma nu_i.
double vbar_block(const Problem& p, const Iterate& u, int i, double gamma);

/// g'(gamma) = sum_i [<s_i,x_i> - nu_i vbar_i(gamma) - nu_i/gamma].
double g_prime(const Problem& p, const Iterate& u, double gamma);

struct WStart {
  ControlVars w;
  double gamma = 0.0;
  Vec vbar;
};

WStart choose_w_start_detail(const Problem& p, const Iterate& u, double tol = 1e-10);
ControlVars choose_w_start(const Problem& p, const Iterate& u, double tol = 1e-10);

/// bound - mu*(w_s) with bound = (3<s,x> + gamma0_max <s,x>^2)/(1 + nu).
double mu_star_bound_check(const Problem& p, const Iterate& u, const ControlVars& w_s);

}  // namespace mcopt
