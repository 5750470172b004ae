#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirlat/atspp.hpp"
#include "dirlat/dirlat_solve.hpp"
#include "dirlat/errors.hpp"
#include "dirlat/gap.hpp"
#include "dirlat/latency_lp.hpp"
#include "dirlat/metric.hpp"
#include "dirlat/regret.hpp"

namespace dirlat::io {

using nlohmann::json;

inline json to_json(const Rational& r) { return r.str(); }

inline Rational rational_from(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (!j.is_string()) throw StructuralError("expected a rational string, got " + j.dump());
  try {
    return Rational::parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw StructuralError("bad rational '" + j.get<std::string>() + "': " + e.what());
  }
}

inline json optional_json(const std::optional<Rational>& r) { return r ? to_json(*r) : json(nullptr); }

inline json matrix_json(const Matrix& m) {
  json out = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& v : row) r.push_back(to_json(v));
    out.push_back(r);
  }
  return out;
}

inline Matrix matrix_from(const json& j) {
  if (!j.is_array()) throw StructuralError("matrix must be an array of rows");
  Matrix m;
  for (const auto& row : j) {
    if (!row.is_array()) throw StructuralError("matrix row must be an array");
    std::vector<Rational> r;
    for (const auto& v : row) r.push_back(rational_from(v));
    m.push_back(std::move(r));
  }
  return m;
}

inline json metric_json(const Metric& m) {
  return json{{"n", m.n()},
              {"symmetric", m.symmetric},
              {"depot", m.depot},
              {"s", m.s ? json(*m.s) : json(nullptr)},
              {"t", m.t ? json(*m.t) : json(nullptr)},
              {"dist", matrix_json(m.dist)}};
}

/// Reads an instance and rejects anything that is not a metric.
inline Metric metric_from(const json& j) {
  if (!j.is_object() || !j.contains("dist")) throw StructuralError("instance needs a dist matrix");
  Metric m;
  m.dist = matrix_from(j.at("dist"));
  check_shape(m.dist);
  if (j.contains("n") && j.at("n").get<int>() != m.n()) throw StructuralError("n does not match the matrix size");
  m.symmetric = j.value("symmetric", false);
  m.depot = j.value("depot", 0);
  auto node = [&](const char* key) -> std::optional<int> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    int v = j.at(key).get<int>();
    if (v < 0 || v >= m.n()) throw StructuralError(std::string(key) + " is out of range");
    return v;
  };
  m.s = node("s");
  m.t = node("t");
  if (m.depot < 0 || m.depot >= m.n()) throw StructuralError("depot is out of range");
  auto rep = validate_metric(m);
  if (!rep.valid()) {
    std::string why;
    if (!rep.diagonal.empty()) why = "nonzero diagonal at node " + std::to_string(rep.diagonal.front());
    else if (!rep.triangle.empty())
      why = "triangle inequality fails for " + std::to_string(rep.triangle.front()[0]) + "," +
            std::to_string(rep.triangle.front()[1]) + "," + std::to_string(rep.triangle.front()[2]);
    else
      why = "matrix flagged symmetric is not symmetric";
    throw StructuralError("not a metric: " + why);
  }
  return m;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw StructuralError("malformed JSON in " + path + ": " + e.what());
  }
}

inline json rounding_json(const RoundingCertificate& c) {
  json stitches = json::array();
  for (const auto& s : c.stitches)
    stitches.push_back({{"u", s.u}, {"v", s.v}, {"cost", to_json(s.cost)}, {"mass", to_json(s.mass)}});
  return json{{"opt_lp", to_json(c.opt_lp)},
              {"path", c.path},
              {"path_cost", to_json(c.path_cost)},
              {"ratio", optional_json(c.ratio)},
              {"z_gap", to_json(c.z_gap)},
              {"rho", to_json(c.rho)},
              {"k", c.k},
              {"ell", c.ell},
              {"circuit_cost", to_json(c.circuit_cost)},
              {"alpha_hat", optional_json(c.alpha_hat)},
              {"walks_cost", to_json(c.walks_cost)},
              {"cycles_cost", to_json(c.cycles_cost)},
              {"stitch_cost", to_json(c.stitch_cost)},
              {"y_sum", to_json(c.y_sum)},
              {"max_crossings", c.max_crossings},
              {"stitches", stitches},
              {"checks",
               {{"z_gap", c.z_gap * (Rational(2) * c.rho - Rational(1)) <= c.opt_lp},
                {"cycle_bound", cycle_bound_holds(c)},
                {"path_bound", path_bound_holds(c)}}}};
}

inline json regret_json(const RegretCertificate& c) {
  std::optional<Rational> ratio;
  if (c.opt_lp.sign() > 0) ratio = c.final_cost / c.opt_lp;
  json paths = json::array();
  for (const auto& p : c.paths) paths.push_back({{"path", p.path}, {"gamma", to_json(p.gamma)}, {"red", p.red.red}});
  return json{{"opt_lp", to_json(c.opt_lp)},
              {"path", c.path},
              {"path_cost", to_json(c.final_cost)},
              {"ratio", optional_json(ratio)},
              {"rho", to_json(c.rho)},
              {"delta", to_json(c.delta)},
              {"red_ratio_max", optional_json(c.red_ratio_max)},
              {"cycle_cost", to_json(c.cycle_cost)},
              {"branching_q", c.branching_q},
              {"paths_cost", to_json(c.paths_cost)},
              {"forest_cost", to_json(c.forest_cost)},
              {"shortcut_cost", to_json(c.shortcut_cost)},
              {"min_witness_cover", to_json(c.min_witness_cover)},
              {"witness_path_cost", to_json(c.witness_path_cost)},
              {"witnesses", c.witnesses.witness},
              {"bound", to_json(c.bound)},
              {"branching_paths", paths},
              {"checks",
               {{"branching_contract", c.branching_contract.empty()},
                {"red_edges", c.red_bound},
                {"branching_paths", c.paths_cost <= Rational(2) * c.opt_lp && c.stitch_bound},
                {"witness_cycles", c.cycle_cost * (c.rho - c.delta) <= Rational(6) * c.opt_lp},
                {"shortcuts", c.shortcut_order && c.acyclic && c.min_witness_cover >= c.delta &&
                                  c.shortcut_cost <= Rational(2) * c.opt_lp},
                {"witness_path", c.witness_path_cost * (Rational(2) * c.delta - Rational(1)) <= Rational(2) * c.opt_lp},
                {"final", c.final_cost <= c.bound}}}};
}

inline json guess_json(const GuessProfile& g) {
  json out = json::array();
  for (const auto& s : g.slots) out.push_back(s ? json{{"v", s->first}, {"l", s->second}} : json(nullptr));
  return out;
}

inline json latency_json(const LatencyCertificate& c, bool require_opt_consistent) {
  json buckets = json::array();
  for (const auto& b : c.buckets)
    buckets.push_back({{"i", b.index},
                       {"v_star", b.vstar},
                       {"l_star", b.lstar},
                       {"members", b.members},
                       {"bound", to_json(b.bound)},
                       {"flow_cost", to_json(b.flow_cost)},
                       {"induced_lp", to_json(b.induced_lp)},
                       {"path", b.path},
                       {"cost", to_json(b.cost)},
                       {"alpha_hat", to_json(b.alpha_hat)}});
  json stitches = json::array();
  for (const auto& s : c.stitches)
    stitches.push_back({{"from", s.from}, {"to", s.to}, {"bucket", s.next_bucket}, {"cost", to_json(s.cost)}, {"bound", to_json(s.bound)}});
  json nodes = json::array();
  for (std::size_t v = 0; v < c.threshold.size(); ++v)
    if (c.threshold[v] >= 0) nodes.push_back({{"v", v}, {"t", c.threshold[v]}, {"arrival", to_json(c.arrival[v])}});
  auto fails = c.failures(require_opt_consistent);
  return json{{"guess", guess_json(c.guess)},
              {"rho", to_json(c.rho)},
              {"horizon", c.horizon},
              {"backend", to_string(c.backend)},
              {"lp_objective", to_json(c.lp_objective)},
              {"buckets", buckets},
              {"stitches", stitches},
              {"nodes", nodes},
              {"path", c.path},
              {"alpha_hat", to_json(c.alpha_hat)},
              {"latency", to_json(c.latency)},
              {"local_bound", to_json(c.local_bound)},
              {"opt", optional_json(c.opt)},
              {"opt_bound", optional_json(c.opt_bound)},
              {"failures", fails},
              {"verified", fails.empty()}};
}

/// Debug dump listing only nonzero entries.
inline json time_indexed_json(const LatencyLpModel& model, const TimeIndexedSolution& sol) {
  json x = json::object(), z = json::object();
  for (std::size_t v = 0; v < sol.x.size(); ++v)
    for (std::size_t t = 0; t < sol.x[v].size(); ++t)
      if (!sol.x[v][t].is_zero()) x[std::to_string(v) + "," + std::to_string(t)] = to_json(sol.x[v][t]);
  for (std::size_t j = 0; j < sol.z.size(); ++j)
    if (!sol.z[j].is_zero()) {
      const auto& a = model.arcs[j];
      z[std::to_string(a.u) + "," + std::to_string(a.v) + "," + std::to_string(a.t)] = to_json(sol.z[j]);
    }
  return json{{"T", sol.horizon}, {"x", x}, {"z", z}};
}

inline json gap_record_json(const GapRecord& r) {
  return json{{"dist", matrix_json(r.metric.dist)},
              {"s", r.s},
              {"t", r.t},
              {"rho", to_json(r.rho)},
              {"ratio", r.ratio ? to_json(*r.ratio) : json("inf")}};
}

inline GapRecord gap_record_from(const json& j) {
  GapRecord r;
  r.metric.dist = matrix_from(j.at("dist"));
  check_shape(r.metric.dist);
  if (!validate_metric(r.metric).valid()) throw StructuralError("archived matrix is not a metric");
  r.s = j.value("s", 0);
  r.t = j.value("t", r.metric.n() - 1);
  r.rho = rational_from(j.at("rho"));
  if (j.at("ratio") != "inf") r.ratio = rational_from(j.at("ratio"));
  return r;
}

inline void append_gap_record(std::ostream& out, const GapRecord& r) { out << gap_record_json(r).dump() << '\n'; }

inline std::vector<GapRecord> read_gap_archive(std::istream& in) {
  std::vector<GapRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(gap_record_from(json::parse(line)));
    } catch (const json::exception& e) {
      throw StructuralError(std::string("bad archive line: ") + e.what());
    }
  }
  return out;
}

/// Recomputes the ratio of an archived record; true when it matches exactly.
inline bool reverify_gap_record(const GapRecord& r) {
  auto g = measure_gap(r.metric, r.s, r.t, r.rho);
  return g.ratio == r.ratio;
}

}  // namespace dirlat::io
