#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mcopt/coupling.hpp"

namespace mcopt::verify {

/// Worst observed error against a pinned tolerance.
struct CheckResult {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  int samples = 0;
  bool pass() const { return worst <= tol; }
};

/// |a - b| / max(1, |a|, |b|).
double rel_err(double a, double b);
double rel_err(const Vec& a, const Vec& b);

/// NonNeg, Lorentz n in {1,2,5}, Psd p in {1,2,3,5}.
std::vector<ConeSpec> family_members(const std::string& family);
std::string cone_label(const ConeSpec& c);

/// Interior point scaled by exp(U(-1, 1)).
ConePoint sample_scaled(const ConeSpec& c, std::mt19937_64& rng);
/// Random z with x + v^2 grad F*(s) interior, v^2 a uniform fraction of the admissible range.
CouplingPoint sample_coupling(const ConeSpec& c, std::mt19937_64& rng, bool scaled = true);
CouplingGrad sample_coupling_direction(const ConeSpec& c, std::mt19937_64& rng);

std::vector<CheckResult> barrier_identities(const ConeSpec& c, int samples, std::mt19937_64& rng);
std::vector<CheckResult> scaling_residuals(const ConeSpec& c, int samples, std::mt19937_64& rng);
std::vector<CheckResult> coupling_suite(const ConeSpec& c, int samples, std::mt19937_64& rng);
std::vector<CheckResult> self_concordance(const ConeSpec& c, int samples, std::mt19937_64& rng);
std::vector<CheckResult> comp_assumption(const ConeSpec& c, int samples, std::mt19937_64& rng);
std::vector<CheckResult> coupling_derivatives(const ConeSpec& c, int samples, std::mt19937_64& rng);

/// Every suite above for one cone.
std::vector<CheckResult> run_all(const ConeSpec& c, int samples, std::uint64_t seed);

}  // namespace mcopt::verify
