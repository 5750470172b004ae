#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dirlat/dirlat_solve.hpp"
#include "dirlat/exact.hpp"
#include "dirlat/gap.hpp"
#include "dirlat/io.hpp"

using namespace dirlat;
using io::json;

namespace {

struct RunConfig {
  std::string input;
  std::string output;
  std::string rho = "2/3";
  std::string epsilon = "1/10";
  std::string delta;
  std::string mode = "guided";
  std::string backend = "exact";
  std::uint64_t seed = 1;
  long long cap = 10000000;
  int nodes = 6;
  int max_dist = 8;
  bool symmetric = false;
  int max_horizon = 4096;
  std::optional<int> s;
  std::optional<int> t;
  std::string x_file;
  bool strengthened = false;
  bool claim = false;
  bool search = false;
  int iterations = 200;
  std::string archive;
  std::string reverify;
};

Rational rational_arg(const std::string& text, const char* name) {
  try {
    return Rational::parse(text);
  } catch (const std::exception& e) {
    throw PreconditionError(std::string("--") + name + ": " + e.what());
  }
}

void emit(const RunConfig& cfg, const json& doc) {
  if (cfg.output.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(cfg.output);
  if (!out) throw StructuralError("cannot write " + cfg.output);
  out << doc.dump(2) << '\n';
}

Metric load_instance(const RunConfig& cfg) {
  if (cfg.input.empty()) throw PreconditionError("--input is required");
  return io::metric_from(io::read_json_file(cfg.input));
}

std::pair<int, int> endpoints(const RunConfig& cfg, const Metric& m) {
  int s = cfg.s ? *cfg.s : m.s ? *m.s : 0;
  int t = cfg.t ? *cfg.t : m.t ? *m.t : m.n() - 1;
  require(s >= 0 && t >= 0 && s < m.n() && t < m.n() && s != t, "invalid endpoints");
  return {s, t};
}

bool all_true(const json& checks) {
  for (const auto& [k, v] : checks.items())
    if (!v.get<bool>()) return false;
  return true;
}

int cmd_generate(const RunConfig& cfg) {
  Metric m = generate_random(cfg.nodes, cfg.max_dist, cfg.seed, cfg.symmetric);
  emit(cfg, io::metric_json(m));
  return 0;
}

int cmd_solve_dirlat(const RunConfig& cfg) {
  Metric m = load_instance(cfg);
  SolveOptions opt;
  opt.rho = rational_arg(cfg.rho, "rho");
  if (!cfg.delta.empty()) opt.delta = rational_arg(cfg.delta, "delta");
  if (cfg.mode == "guided") opt.mode = GuessMode::Guided;
  else if (cfg.mode == "exhaustive") opt.mode = GuessMode::Exhaustive;
  else throw PreconditionError("--mode must be guided or exhaustive");
  if (cfg.backend == "exact") opt.backend = BucketBackend::Exact;
  else if (cfg.backend == "lp-round") opt.backend = BucketBackend::LpRound;
  else if (cfg.backend == "regret") opt.backend = BucketBackend::Regret;
  else throw PreconditionError("--backend must be exact, lp-round or regret");
  opt.guess_cap = cfg.cap;

  json doc;
  doc["command"] = "solve-dirlat";
  Metric work = m;
  if (!m.is_positive_integer()) {
    const Rational eps = rational_arg(cfg.epsilon, "epsilon");
    auto scaled = scale_instance(m, eps, Rational(1));
    if (scaled.zero_optimum) {
      auto ex = exact_dirlat(m);
      doc["zero_optimum"] = true;
      doc["path"] = ex.path;
      doc["latency"] = io::to_json(ex.value);
      doc["verified"] = ex.value.is_zero();
      emit(cfg, doc);
      return ex.value.is_zero() ? 0 : 1;
    }
    work = scaled.instance->scaled;
    doc["scaled"] = {{"epsilon", io::to_json(eps)},
                     {"scale_factor", io::to_json(scaled.instance->scale_factor)},
                     {"nu", io::to_json(scaled.instance->nu)}};
  }
  const int horizon = default_horizon(work);
  if (horizon > cfg.max_horizon)
    throw CapacityError("horizon " + std::to_string(horizon) + " exceeds --max-horizon " + std::to_string(cfg.max_horizon));
  auto res = solve_dirlat(work, opt);
  doc["mode"] = to_string(opt.mode);
  doc["guesses"] = res.guesses;
  doc["feasible_guesses"] = res.feasible;
  if (!res.best) {
    doc["verified"] = false;
    doc["reason"] = "no feasible guess";
    emit(cfg, doc);
    return 1;
  }
  json cert = io::latency_json(*res.best, opt.mode == GuessMode::Guided);
  doc["certificate"] = cert;
  doc["path"] = res.best->path;
  doc["latency"] = io::to_json(latency(res.best->path, m).total);
  doc["verified"] = cert.at("verified");
  emit(cfg, doc);
  return cert.at("verified").get<bool>() ? 0 : 1;
}

int cmd_solve_atspp(const RunConfig& cfg) {
  Metric m = load_instance(cfg);
  auto [s, t] = endpoints(cfg, m);
  auto st = solve_atspp_lp(m, s, t, rational_arg(cfg.rho, "rho"));
  auto cert = round_path(st, uncross(st, solve_zmin_dual(st)));
  json doc = io::rounding_json(cert);
  doc["command"] = "solve-atspp";
  doc["s"] = s;
  doc["t"] = t;
  const bool ok = all_true(doc.at("checks"));
  doc["verified"] = ok;
  emit(cfg, doc);
  return ok ? 0 : 1;
}

int cmd_regret(const RunConfig& cfg) {
  Metric base = load_instance(cfg);
  require(base.symmetric, "regret needs a symmetric instance");
  auto [s, t] = endpoints(cfg, base);
  const Rational rho = rational_arg(cfg.rho, "rho");
  const Rational delta = cfg.delta.empty() ? delta_opt(rho) : rational_arg(cfg.delta, "delta");
  auto st = solve_atspp_lp(regret_transform(base, s), s, t, rho);
  auto cert = round_regret(base, st, delta);
  json doc = io::regret_json(cert);
  doc["command"] = "regret";
  doc["s"] = s;
  doc["t"] = t;
  doc["gap_bound_factor"] = io::to_json(regret_gap_bound(rho, delta));
  const bool ok = all_true(doc.at("checks"));
  doc["verified"] = ok;
  emit(cfg, doc);
  return ok ? 0 : 1;
}

int cmd_gap(const RunConfig& cfg) {
  const Rational rho = rational_arg(cfg.rho, "rho");
  json doc;
  doc["command"] = "gap";
  if (!cfg.reverify.empty()) {
    std::ifstream in(cfg.reverify);
    if (!in) throw StructuralError("cannot open " + cfg.reverify);
    auto records = io::read_gap_archive(in);
    json results = json::array();
    bool ok = true;
    for (const auto& r : records) {
      bool match = io::reverify_gap_record(r);
      ok = ok && match;
      results.push_back({{"ratio", r.ratio ? io::to_json(*r.ratio) : json("inf")}, {"reverified", match}});
    }
    doc["records"] = results;
    doc["verified"] = ok;
    emit(cfg, doc);
    return ok ? 0 : 1;
  }
  GapRecord rec;
  if (cfg.search) {
    GapSearchOptions opt;
    opt.nodes = cfg.nodes;
    opt.max_dist = cfg.max_dist;
    opt.iterations = cfg.iterations;
    opt.seed = cfg.seed;
    rec = gap_search(rho, opt);
  } else {
    Metric m = load_instance(cfg);
    auto [s, t] = endpoints(cfg, m);
    auto g = measure_gap(m, s, t, rho);
    rec = GapRecord{m, s, t, rho, g.ratio};
    doc["integral"] = io::to_json(g.integral);
    doc["opt_lp"] = io::to_json(g.lp);
  }
  if (!cfg.archive.empty()) {
    std::ofstream out(cfg.archive, std::ios::app);
    if (!out) throw StructuralError("cannot append to " + cfg.archive);
    io::append_gap_record(out, rec);
  }
  doc["record"] = io::gap_record_json(rec);
  doc["target"] = io::to_json(Rational(1) / (Rational(2) * rho - Rational(1)));
  emit(cfg, doc);
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  Metric m = load_instance(cfg);
  auto [s, t] = endpoints(cfg, m);
  if (cfg.x_file.empty()) throw PreconditionError("--x is required");
  json xj = io::read_json_file(cfg.x_file);
  Matrix x = io::matrix_from(xj.is_object() ? xj.at("x") : xj);
  auto v = verify_gap_certificate(m, s, t, x, rational_arg(cfg.rho, "rho"), cfg.strengthened, cfg.claim);
  json doc{{"command", "verify"}, {"certificate", v.certificate}};
  if (!v.certificate) {
    doc["reason"] = v.reason;
    if (v.violated_cut) doc["violated_cut"] = members(*v.violated_cut);
    std::cerr << "not a certificate: " << v.reason << '\n';
  } else {
    doc["cost"] = io::to_json(v.cost);
    doc["integral"] = io::to_json(v.integral);
    doc["ratio"] = v.ratio ? io::to_json(*v.ratio) : json("inf");
    if (v.claim_holds) doc["claim_holds"] = *v.claim_holds;
  }
  emit(cfg, doc);
  return v.certificate && v.claim_holds.value_or(true) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed latency and ATSP-path LP rounding toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Instance JSON");
    sub->add_option("--output", cfg.output, "Write the JSON result here instead of stdout");
    sub->add_option("--rho", cfg.rho, "Cut parameter rho as p/q");
  };
  auto endpoints_opts = [&](CLI::App* sub) {
    sub->add_option("--s", cfg.s, "Path start (default: instance s, else 0)");
    sub->add_option("--t", cfg.t, "Path end (default: instance t, else n-1)");
  };

  auto* gen = app.add_subcommand("generate", "Write a random metric instance");
  gen->add_option("--n", cfg.nodes, "Number of nodes including the depot");
  gen->add_option("--max", cfg.max_dist, "Largest raw distance");
  gen->add_option("--seed", cfg.seed, "Generator seed");
  gen->add_flag("--symmetric", cfg.symmetric, "Symmetric distances");
  gen->add_option("--output", cfg.output, "Instance file");

  auto* dl = app.add_subcommand("solve-dirlat", "Directed latency by guess enumeration and bucket paths");
  common(dl);
  dl->add_option("--epsilon", cfg.epsilon, "Scaling accuracy for non-integer instances");
  dl->add_option("--delta", cfg.delta, "Regret backend delta");
  dl->add_option("--mode", cfg.mode, "guided|exhaustive");
  dl->add_option("--backend", cfg.backend, "exact|lp-round|regret");
  dl->add_option("--cap", cfg.cap, "Guess cap for exhaustive mode");
  dl->add_option("--max-horizon", cfg.max_horizon, "Refuse instances whose horizon exceeds this");

  auto* at = app.add_subcommand("solve-atspp", "LP rounding for the ATSP path problem");
  common(at);
  endpoints_opts(at);

  auto* rg = app.add_subcommand("regret", "Rounding in the regret metric of a symmetric instance");
  common(rg);
  endpoints_opts(rg);
  rg->add_option("--delta", cfg.delta, "Witness threshold delta (default: optimal for rho)");

  auto* gp = app.add_subcommand("gap", "Measure, search, archive and re-verify integrality gaps");
  common(gp);
  endpoints_opts(gp);
  gp->add_flag("--search", cfg.search, "Run the randomized search instead of reading --input");
  gp->add_option("--n", cfg.nodes, "Search instance size");
  gp->add_option("--max", cfg.max_dist, "Search distance range");
  gp->add_option("--iterations", cfg.iterations, "Search steps");
  gp->add_option("--seed", cfg.seed, "Search seed");
  gp->add_option("--archive", cfg.archive, "Append the record to this JSON-lines file");
  gp->add_option("--reverify", cfg.reverify, "Re-verify every record of an archive");

  auto* vf = app.add_subcommand("verify", "Check a fractional solution as a gap certificate");
  common(vf);
  endpoints_opts(vf);
  vf->add_option("--x", cfg.x_file, "Fractional solution: matrix or {\"x\": matrix}");
  vf->add_flag("--strengthened", cfg.strengthened, "Also require unit in-degree");
  vf->add_flag("--claim", cfg.claim, "Require ratio >= 1/(2 rho - 1)");

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*gen) return cmd_generate(cfg);
    if (*dl) return cmd_solve_dirlat(cfg);
    if (*at) return cmd_solve_atspp(cfg);
    if (*rg) return cmd_regret(cfg);
    if (*gp) return cmd_gap(cfg);
    if (*vf) return cmd_verify(cfg);
  } catch (const StructuralError& e) {
    std::cerr << name << ": invalid input: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << name << ": precondition: " << e.what() << '\n';
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << name << ": capacity: " << e.what() << '\n';
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << name << ": internal check failed: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
