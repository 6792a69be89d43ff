#include "mcopt/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "mcopt/error.hpp"

namespace mcopt::io {

using nlohmann::json;

namespace {

struct Entry {
  ConeKind kind;
  int dim;      // as written in the file
  int offset;   // first flat column
  int width;    // flat columns
  int blocks;   // cone blocks produced
};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "non-finite number");
  return v;
}

Vec number_array(const json& j, int len, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  if (static_cast<int>(j.size()) != len) {
    fail(where, "expected " + std::to_string(len) + " entries, got " + std::to_string(j.size()));
  }
  Vec v(len);
  for (int i = 0; i < len; ++i) v(i) = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

// Flat row-major p x p matrix from nested arrays; checks symmetry.
Vec sym_matrix(const json& j, int p, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != p) {
    fail(where, "expected a " + std::to_string(p) + "x" + std::to_string(p) + " matrix");
  }
  Vec v(p * p);
  for (int r = 0; r < p; ++r) {
    v.segment(r * p, p) = number_array(j[r], p, where + "[" + std::to_string(r) + "]");
  }
  for (int r = 0; r < p; ++r) {
    for (int c = r + 1; c < p; ++c) {
      const double a = v(r * p + c), b = v(c * p + r);
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
        fail(where, "matrix is not symmetric at (" + std::to_string(r) + "," + std::to_string(c) + ")");
      }
    }
  }
  return v;
}

Vec block_values(const json& j, const Entry& e, const std::string& where) {
  if (e.kind == ConeKind::Psd) return sym_matrix(j, e.dim, where);
  return number_array(j, e.dim, where);
}

json block_json(const Vec& v, ConeKind kind, int dim) {
  json out = json::array();
  if (kind == ConeKind::Psd) {
    for (int r = 0; r < dim; ++r) {
      json row = json::array();
      for (int c = 0; c < dim; ++c) row.push_back(v(r * dim + c));
      out.push_back(row);
    }
  } else {
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  }
  return out;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// File-level entries: consecutive NonNeg blocks are merged.
std::vector<Entry> group_blocks(const Problem& p) {
  std::vector<Entry> es;
  for (int i = 0; i < p.n_blocks(); ++i) {
    const ConeSpec& k = p.cone(i);
    if (k.kind == ConeKind::NonNeg && !es.empty() && es.back().kind == ConeKind::NonNeg) {
      es.back().dim += 1;
      es.back().width += 1;
      es.back().blocks += 1;
      continue;
    }
    const int dim = k.kind == ConeKind::Psd ? k.param : k.dim();
    es.push_back({k.kind, dim, p.offset(i), k.dim(), 1});
  }
  return es;
}

json per_block(const Vec& flat, const std::vector<Entry>& es) {
  json out = json::array();
  for (const Entry& e : es) out.push_back(block_json(flat.segment(e.offset, e.width), e.kind, e.dim));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot write file");
  out << text;
}

}  // namespace

ProblemFile parse_problem_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(source, std::string("invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) fail(source, "top level must be an object");
  for (const char* key : {"m", "cones", "A", "b", "c"}) {
    if (!j.contains(key)) fail(source, std::string("missing field '") + key + "'");
  }
  if (!j["m"].is_number_integer() || j["m"].get<long long>() < 1) fail(source + ": m", "must be a positive integer");
  const int m = j["m"].get<int>();

  const json& jc = j["cones"];
  if (!jc.is_array() || jc.empty()) fail(source + ": cones", "must be a non-empty array");
  std::vector<Entry> es;
  std::vector<ConeSpec> cones;
  int off = 0;
  for (size_t i = 0; i < jc.size(); ++i) {
    const std::string where = source + ": cones[" + std::to_string(i) + "]";
    const json& c = jc[i];
    if (!c.is_object() || !c.contains("kind") || !c.contains("dim")) fail(where, "needs 'kind' and 'dim'");
    if (!c["kind"].is_string()) fail(where + ".kind", "must be a string");
    if (!c["dim"].is_number_integer()) fail(where + ".dim", "must be an integer");
    const std::string kind = c["kind"].get<std::string>();
    const long long dim = c["dim"].get<long long>();
    Entry e{};
    e.offset = off;
    e.dim = static_cast<int>(dim);
    if (kind == "nonneg") {
      if (dim < 1) fail(where + ".dim", "nonneg dim must be >= 1, got " + std::to_string(dim));
      e.kind = ConeKind::NonNeg;
      e.width = e.dim;
      e.blocks = e.dim;
      for (int k = 0; k < e.dim; ++k) cones.push_back(ConeSpec::nonneg());
    } else if (kind == "lorentz") {
      if (dim < 2) fail(where + ".dim", "lorentz dim must be >= 2, got " + std::to_string(dim));
      e.kind = ConeKind::Lorentz;
      e.width = e.dim;
      e.blocks = 1;
      cones.push_back(ConeSpec::lorentz(e.dim - 1));
    } else if (kind == "psd") {
      if (dim < 1) fail(where + ".dim", "psd dim must be >= 1, got " + std::to_string(dim));
      e.kind = ConeKind::Psd;
      e.width = e.dim * e.dim;
      e.blocks = 1;
      cones.push_back(ConeSpec::psd(e.dim));
    } else {
      fail(where + ".kind", "unknown cone kind '" + kind + "'");
    }
    off += e.width;
    es.push_back(e);
  }

  auto per_block_array = [&](const json& arr, const std::string& name) {
    if (!arr.is_array() || arr.size() != es.size()) {
      fail(source + ": " + name, "expected one entry per cone (" + std::to_string(es.size()) + ")");
    }
  };

  Mat A(m, off);
  per_block_array(j["A"], "A");
  for (size_t i = 0; i < es.size(); ++i) {
    const Entry& e = es[i];
    const std::string where = source + ": A[" + std::to_string(i) + "]";
    const json& ja = j["A"][i];
    if (!ja.is_array() || static_cast<int>(ja.size()) != m) fail(where, "expected " + std::to_string(m) + " rows");
    for (int r = 0; r < m; ++r) {
      A.row(r).segment(e.offset, e.width) =
          block_values(ja[r], e, where + "[" + std::to_string(r) + "]").transpose();
    }
  }
  Vec b = number_array(j["b"], m, source + ": b");
  Vec c(off);
  per_block_array(j["c"], "c");
  for (size_t i = 0; i < es.size(); ++i) {
    c.segment(es[i].offset, es[i].width) = block_values(j["c"][i], es[i], source + ": c[" + std::to_string(i) + "]");
  }

  ProblemFile pf{Problem(cones, A, b, c), std::nullopt};
  if (j.contains("start")) {
    const json& js = j["start"];
    if (!js.is_object() || !js.contains("x") || !js.contains("y")) fail(source + ": start", "needs 'x' and 'y'");
    per_block_array(js["x"], "start.x");
    Iterate u;
    u.x.resize(off);
    for (size_t i = 0; i < es.size(); ++i) {
      u.x.segment(es[i].offset, es[i].width) =
          block_values(js["x"][i], es[i], source + ": start.x[" + std::to_string(i) + "]");
    }
    u.y = number_array(js["y"], m, source + ": start.y");
    refresh_slack(pf.problem, u);
    pf.start = std::move(u);
  }
  return pf;
}

ProblemFile parse_problem(const std::string& path) { return parse_problem_text(read_file(path), path); }

std::string problem_to_json(const Problem& p, const Iterate* start) {
  const std::vector<Entry> es = group_blocks(p);
  json j;
  j["m"] = p.m();
  json cones = json::array();
  for (const Entry& e : es) cones.push_back({{"kind", kind_name(e.kind)}, {"dim", e.dim}});
  j["cones"] = cones;
  json a = json::array();
  for (const Entry& e : es) {
    json rows = json::array();
    for (int r = 0; r < p.m(); ++r) {
      rows.push_back(block_json(p.A().row(r).segment(e.offset, e.width).transpose(), e.kind, e.dim));
    }
    a.push_back(rows);
  }
  j["A"] = a;
  j["b"] = vec_json(p.b());
  j["c"] = per_block(p.c(), es);
  if (start) j["start"] = {{"x", per_block(start->x, es)}, {"y", vec_json(start->y)}};
  return j.dump(1) + "\n";
}

void write_problem(const std::string& path, const Problem& p, const Iterate* start) {
  write_file(path, problem_to_json(p, start));
}

std::string solution_to_json(const Problem& p, const SolveResult& r) {
  const std::vector<Entry> es = group_blocks(p);
  int npred = 0;
  for (const TraceRecord& t : r.trace) npred += t.stage == Stage::Predictor;
  json j;
  j["status"] = status_name(r.status);
  j["message"] = r.message;
  j["predictor_steps"] = npred;
  j["corrector_steps"] = r.corrector_steps;
  j["gap"] = duality_gap(p, r.u);
  j["primal_objective"] = p.c().dot(r.u.x);
  j["dual_objective"] = p.b().dot(r.u.y);
  j["w"] = {{"v0", r.w.v0}, {"v", vec_json(r.w.v)}};
  j["x"] = per_block(r.u.x, es);
  j["y"] = vec_json(r.u.y);
  j["s"] = per_block(r.u.s, es);
  return j.dump(1) + "\n";
}

void write_solution(const std::string& path, const Problem& p, const SolveResult& r) {
  write_file(path, solution_to_json(p, r));
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "iter,stage,omega,v0,gap,mu_star,decrement_or_alpha,rho\n";
  for (const TraceRecord& t : trace) {
    os << t.iter << ',' << (t.stage == Stage::Corrector ? "corrector" : "predictor") << ',' << t.omega
       << ',' << t.v0 << ',' << t.gap << ',' << t.mu_star << ',' << t.decrement_or_alpha << ',' << t.rho
       << '\n';
  }
  return os.str();
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  write_file(path, trace_to_csv(trace));
}

std::vector<ConeSpec> parse_cone_list(const std::string& spec) {
  std::vector<ConeSpec> cones;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail("--cones", "item '" + item + "' needs kind:size");
    const std::string kind = item.substr(0, colon);
    int n = 0;
    try {
      size_t used = 0;
      n = std::stoi(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail("--cones", "bad size in '" + item + "'");
    }
    if (n < 1) fail("--cones", "size must be >= 1 in '" + item + "'");
    if (kind == "nonneg") {
      for (int k = 0; k < n; ++k) cones.push_back(ConeSpec::nonneg());
    } else if (kind == "lorentz") {
      cones.push_back(ConeSpec::lorentz(n));
    } else if (kind == "psd") {
      cones.push_back(ConeSpec::psd(n));
    } else {
      fail("--cones", "unknown kind '" + kind + "'");
    }
  }
  if (cones.empty()) fail("--cones", "empty cone list");
  return cones;
}

}  // namespace mcopt::io
