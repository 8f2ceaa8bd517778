#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "paracr/cartan.hpp"
#include "paracr/pairfile.hpp"
#include "paracr/parser.hpp"
#include "paracr/symmetry.hpp"
#include "report.hpp"
#include "suite.hpp"

using namespace paracr;
using namespace paracr::cli;

namespace {

enum Exit { kPass = 0, kFail = 1, kParse = 2, kInadmissible = 3, kDomain = 4 };

struct Options {
  int samples = 64;
  double tol = 1e-9;
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::string out;
  std::string b;
  int eps = 0;
  std::string file;
  std::string model;
  bool solve = false;
  int degree = 2;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ZeroTestProtocol protocol(const Options& o) {
  ZeroTestProtocol p;
  p.samples = o.samples;
  p.tol = o.tol;
  if (o.seed) {
    p.seed = *o.seed;
  } else if (const char* env = std::getenv("PARACR_SEED")) {
    p.seed = std::stoull(env);
  }
  return p;
}

std::optional<Q> param_value(const Options& o) {
  if (o.b.empty()) return std::nullopt;
  Expr e = parse_expression(o.b);
  if (!e.is_num()) throw UsageError("--b expects a number");
  return e.num();
}

PdePair load(const Options& o) {
  PdePair p = load_pair(o.file);
  if (auto b = param_value(o)) p = with_param(p, "", *b);
  return specialize(p);
}

void emit(const Report& r, const Options& o, double t) {
  std::string text = o.json ? r.to_json(t).dump(2) + "\n" : r.to_text(t);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << text;
  }
}

void echo_pair(Report& r, const PdePair& p, const Options& o) {
  r.input()["file"] = o.file;
  r.input()["F"] = to_string(p.F());
  r.input()["H"] = to_string(p.H());
  if (!o.b.empty()) r.input()["b"] = o.b;
}

// Expressions that pass the zero test print as 0.
std::string show(const Expr& e, const ZeroTestProtocol& proto) {
  if (e.is_zero() || is_identically_zero(e, proto).zero) return "0";
  return to_string(e);
}

void add_invariants(Report& r, const InvariantBundle& inv, const ZeroTestProtocol& proto) {
  r.data()["A"] = show(inv.A, proto);
  r.data()["B"] = show(inv.B, proto);
  r.data()["C"] = show(inv.C, proto);
  r.data()["Ctilde"] = show(inv.Ct, proto);
  r.data()["I1"] = show(inv.I1, proto);
  r.data()["I2"] = show(inv.I2, proto);
  r.data()["I3"] = show(inv.I3, proto);
}

bool admissibility(Report& r, const PdePair& p, const ZeroTestProtocol& proto) {
  AdmissibilityReport a = check_admissibility(p, proto);
  r.add("F_r = 0", a.fr_zero);
  r.add("F_pp != 0", a.fpp_zero, false);
  r.add("D^3 F = Delta H", a.integrable);
  if (!a.integrable_ok) r.data()["integrability_residual"] = to_string(a.residual);
  return a.admissible();
}

int cmd_check(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  PdePair p = load(o);
  echo_pair(r, p, o);
  if (!admissibility(r, p, proto)) return kInadmissible;
  BranchLabel l = classify(p, proto);
  add_invariants(r, l.inv, p.protocol(proto));
  r.data()["branch"] = to_string(l.branch);
  if (l.eps != 0) r.data()["eps"] = l.eps;
  auto x = check_cross_relations(l.inv, p.protocol(proto));
  r.add("A = 27 I1", x[0]);
  r.add("B = 27 I2", x[1]);
  r.add("C = 3 I3", x[2]);
  return r.pass() ? kPass : kFail;
}

int cmd_invariants(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  PdePair p = load(o);
  echo_pair(r, p, o);
  if (!admissibility(r, p, proto)) return kInadmissible;
  InvariantBundle inv = invariants(p, proto);
  add_invariants(r, inv, p.protocol(proto));
  r.data()["C4"] = to_string(inv.C4);
  r.data()["C5"] = to_string(inv.C5);
  return r.pass() ? kPass : kFail;
}

int cmd_classify(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  PdePair p = load(o);
  echo_pair(r, p, o);
  BranchLabel l = classify(p, proto);
  r.data()["branch"] = to_string(l.branch);
  if (l.branch == Branch::Inadmissible) {
    admissibility(r, p, proto);
    return kInadmissible;
  }
  r.data()["eps"] = l.eps;
  r.add("I3 = 0", l.i3, l.branch != Branch::NonflatI3);
  if (l.branch != Branch::NonflatI3) r.add("I2 = 0", l.i2, l.branch == Branch::Flat);
  return r.pass() ? kPass : kFail;
}

void add_cartan(Report& r, const CartanReport& c, const std::string& prefix) {
  for (const auto& l : c.lines) r.add(prefix, l);
}

void add_symmetries(Report& r, const GeneratorSet& g, const ZeroTestProtocol& proto) {
  GeneratorReport gr = verify_generator_catalog(g, proto);
  for (std::size_t i = 0; i < gr.verdicts.size(); ++i) {
    const auto& v = gr.verdicts[i];
    std::string detail = v.symmetry ? "" : "condition " + std::to_string(v.first_failure) + " fails";
    r.flag("X" + std::to_string(i + 1) + " is a point symmetry", v.symmetry && v.contact, detail);
  }
  r.flag("generators independent", gr.rank == static_cast<int>(g.fields.size()), "rank " + std::to_string(gr.rank));
  CommutatorResult ct = commutator_table(g, proto);
  r.flag("brackets close", ct.closed);
  std::string mism;
  for (auto [i, j] : ct.mismatches) mism += "[X" + std::to_string(i + 1) + ",X" + std::to_string(j + 1) + "] ";
  r.flag("commutator table matches catalog", ct.matches, mism);
  AlgebraReport ar = algebra_analysis(ct.table);
  r.flag("Jacobi identity on brackets", ar.jacobi);
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [key, c] : ct.table.c) {
    std::vector<Expr> t;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] != 0) t.push_back(Expr(c[k]) * var("X" + std::to_string(k + 1)));
    table["[X" + std::to_string(key.first + 1) + ",X" + std::to_string(key.second + 1) + "]"] = to_string(add(t));
  }
  r.data()["commutators"] = table;
  r.data()["algebra"] = {{"dimension", ar.dimension},
                         {"derived_series", ar.derived_series},
                         {"solvable", ar.solvable},
                         {"translations_abelian_ideal", ar.ideal && ar.abelian}};
}

int cmd_verify_model(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  const ModelSpec& m = model(o.model);
  std::optional<Q> b = param_value(o);
  r.input()["model"] = m.id;
  if (!m.params.empty()) r.input()["b"] = to_string(b ? *b : default_param(m));
  if (o.eps) r.input()["eps"] = o.eps;
  check_param(m, b);

  RealizationReport rep = verify_realization(m, b, o.eps, proto);
  r.data()["eps"] = rep.eps;
  for (const auto& l : rep.lines) r.add("realization", l);
  if (m.target != "flat") {
    JacobiResult j = jacobi_check(target_structure(m, b, rep.eps), proto);
    r.flag("structure constants satisfy Jacobi", j.ok);
  }
  if (m.id == "iiia" || m.id == "iiib") {
    SValue s = s_of_b(m.id, (b ? *b : default_param(m)).get_d());
    r.data()["s"] = static_cast<double>(s.s);
  }
  add_symmetries(r, generator_set(m, b), proto);
  if (m.id == "flat") {
    LiftedForms f = lifted_forms();
    add_cartan(r, verify_flatness(connection(f), proto), "flatness");
    add_cartan(r, verify_edsf(f, proto), "edsf");
    add_cartan(r, verify_gauge_relation(f, 20, 1e-8, proto.seed), "gauge");
  }
  return r.pass() ? kPass : kFail;
}

int cmd_mc_flat(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  LiftedForms f = lifted_forms();
  ConnectionMatrix c = connection(f);
  add_cartan(r, verify_independence(f, proto), "independence");
  add_cartan(r, verify_identity_section(f), "identity section");
  add_cartan(r, verify_edsf(f, proto), "edsf");
  add_cartan(r, verify_flatness(c, proto), "flatness");
  add_cartan(r, verify_gauge_relation(f, std::max(20, o.samples / 3), 1e-8, proto.seed), "gauge");
  add_cartan(r, verify_entry_relations(c, proto), "entries");
  add_cartan(r, verify_dd(f, proto), "d d");
  return r.pass() ? kPass : kFail;
}

int cmd_symmetries(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  if (!o.model.empty()) {
    const ModelSpec& m = model(o.model);
    std::optional<Q> b = param_value(o);
    check_param(m, b);
    r.input()["model"] = m.id;
    add_symmetries(r, generator_set(m, b), proto);
    return r.pass() ? kPass : kFail;
  }
  if (o.file.empty()) throw UsageError("symmetries needs --model or --pair");
  if (!o.solve) throw UsageError("--pair requires --solve");
  PdePair p = load(o);
  echo_pair(r, p, o);
  r.input()["degree"] = o.degree;
  DeterminingResult d = solve_determining_equations(p, o.degree, proto);
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& X : d.basis) basis.push_back(X.to_string());
  r.data()["kernel_dimension"] = static_cast<int>(d.basis.size());
  r.data()["unknowns"] = d.unknowns;
  r.data()["basis"] = basis;
  r.data()["possibly_incomplete"] = d.possibly_incomplete;
  r.flag("kernel elements verified", d.verified);
  return r.pass() ? kPass : kFail;
}

int cmd_suite(const Options& o, Report& r) {
  ZeroTestProtocol proto = protocol(o);
  auto crit = run_suite(proto);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : crit) {
    for (const auto& k : c.checks) {
      Check q = k;
      q.name = std::to_string(c.id) + ". " + c.title + ": " + k.name;
      r.add(q);
    }
    list.push_back({{"id", c.id}, {"title", c.title}, {"pass", c.pass()}});
  }
  r.data()["criteria"] = list;
  return r.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paracr: para-CR structures of PDE pairs z_y = F, z_xxx = H"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s) {
    s->add_option("--samples", o.samples, "zero-test samples")->check(CLI::PositiveNumber);
    s->add_option("--tol", o.tol, "relative zero-test tolerance")->check(CLI::PositiveNumber);
    s->add_option("--seed", o.seed, "sampling seed (fallback: PARACR_SEED)");
    s->add_flag("--json", o.json, "JSON report");
    s->add_option("--out", o.out, "write the report to a file");
  };
  std::map<CLI::App*, int (*)(const Options&, Report&)> handlers;
  for (auto [name, help, fn] : std::vector<std::tuple<const char*, const char*, int (*)(const Options&, Report&)>>{
           {"check", "admissibility, invariants and branch of a pair file", cmd_check},
           {"invariants", "relative invariants of a pair file", cmd_invariants},
           {"classify", "branch label of a pair file", cmd_classify}}) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("file", o.file, "pair file")->required();
    s->add_option("--b", o.b, "parameter value");
    common(s);
    handlers[s] = fn;
  }
  auto* vm = app.add_subcommand("verify-model", "verify a homogeneous model from the catalog");
  vm->add_option("model", o.model, "flat | ii | iiia | iiib")->required();
  vm->add_option("--b", o.b, "model parameter");
  vm->add_option("--eps", o.eps, "override eps")->check(CLI::IsMember({-1, 1}));
  common(vm);
  handlers[vm] = cmd_verify_model;
  auto* mc = app.add_subcommand("mc-flat", "flat so(3,2) Cartan connection checks");
  common(mc);
  handlers[mc] = cmd_mc_flat;
  auto* sy = app.add_subcommand("symmetries", "point symmetries of a catalog model or a pair file");
  sy->add_option("--model", o.model, "catalog model id");
  sy->add_option("--pair", o.file, "pair file");
  sy->add_option("--b", o.b, "parameter value");
  sy->add_flag("--solve", o.solve, "solve the determining equations");
  sy->add_option("--degree", o.degree, "polynomial degree bound")->check(CLI::Range(0, 4));
  common(sy);
  handlers[sy] = cmd_symmetries;
  auto* su = app.add_subcommand("suite", "run the acceptance suite");
  common(su);
  handlers[su] = cmd_suite;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kPass : kParse;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto t0 = std::chrono::steady_clock::now();
  ZeroTestProtocol proto;
  try {
    proto = protocol(o);
  } catch (const std::exception& e) {
    std::cerr << "error: invalid PARACR_SEED\n";
    return kParse;
  }
  Report r(sub->get_name(), proto);
  int rc = kPass;
  try {
    rc = handlers.at(sub)(o, r);
  } catch (const PairFileError& e) {
    std::cerr << "error: " << o.file << ":" << e.line() << ": " << e.what() << "\n";
    return kParse;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const ParamDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    r.flag("parameter domain", false, e.what());
    emit(r, o, 0);
    return kDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(r, o, t);
  return rc;
}
