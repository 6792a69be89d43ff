#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcopt/model.hpp"
#include "mcopt/solver.hpp"

namespace mcopt::io {

struct ProblemFile {
  Problem problem;
  std::optional<Iterate> start;
};

/// JSON schema:
///   { "m": int,
///     "cones": [ {"kind": "nonneg"|"lorentz"|"psd", "dim": int}, ... ],
///     "A": per block, "b": [m numbers], "c": per block,
///     "start": {"x": per block, "y": [m numbers]} (optional) }
/// "dim" counts coordinates for nonneg and lorentz, and is the matrix order
/// for psd. A nonneg entry of dim k becomes k one-dimensional blocks.
/// A per block is an m x dim array (vector cones) or m matrices p x p (psd);
/// c and start.x per block are a dim-vector or a p x p matrix.
ProblemFile parse_problem_text(const std::string& text, const std::string& source = "<string>");
ProblemFile parse_problem(const std::string& path);

std::string problem_to_json(const Problem& p, const Iterate* start = nullptr);
void write_problem(const std::string& path, const Problem& p, const Iterate* start = nullptr);

std::string solution_to_json(const Problem& p, const SolveResult& r);
void write_solution(const std::string& path, const Problem& p, const SolveResult& r);

std::string trace_to_csv(const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

/// Parses "nonneg:4,lorentz:3,psd:2"; nonneg:k gives k blocks, lorentz:n a
/// Lorentz cone with spatial dimension n, psd:p a Psd block of order p.
std::vector<ConeSpec> parse_cone_list(const std::string& spec);

}  // namespace mcopt::io
