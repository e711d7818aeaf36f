// cfcalc: command line front end for the constructible-function engine.

#include "cf/analyze.hpp"
#include "cf/frontend.hpp"
#include "cf/integrate.hpp"
#include "cf/oracle.hpp"
#include "cf/prepare.hpp"
#include "cf/report.hpp"
#include "cf/sliver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace cf;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string input;
  bool json = false;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int vars = 1;
  std::string hypothesis = "dense";
  std::string at;
};

/// What a command hands back: the JSON result, its text rendering and the
/// exit status when the result itself is a failure (not integrable).
struct Outcome {
  json result;
  std::string text;
  int status = 0;
  bool oracle_used = false;
};

std::string read_input(const std::string& path)
{
  std::stringstream ss;
  if (path.empty() || path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DomainError, "cannot read " + path);
    ss << in.rdbuf();
  }
  return ss.str();
}

int oracle_samples(int fallback)
{
  if (const char* v = std::getenv("CF_ORACLE_SAMPLES")) {
    const int n = std::atoi(v);
    if (n > 0) return n;
  }
  return fallback;
}

std::string piece_label(std::size_t k, const Cell& source) { return "piece " + std::to_string(k + 1) + " " + to_string(source); }

// ---------------------------------------------------------------- prepare

Outcome cmd_prepare(const SourceForm& s)
{
  Outcome o;
  const auto pieces = prepare(s);
  json ps = json::array();
  std::ostringstream t;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    ps.push_back(report::piece(p));
    const auto names = p.nc.cell.names();
    t << piece_label(k, p.nc.source) << "\n";
    t << "  normalized " << to_string(p.nc.cell) << "\n";
    for (std::size_t j = 0; j < p.nc.G.size(); ++j)
      t << "  " << p.nc.source.vars[j].name << " = " << to_string(p.nc.G[j], names) << "\n";
    t << "  jacobian " << to_string(p.nc.jacobian, names) << "\n";
    t << "  expr " << to_string(p.expr, names) << "\n";
    t << "  prepared " << to_string(p.terms, names) << "\n";
  }
  o.result = {{"pieces", ps}};
  o.text = t.str();
  return o;
}

// ---------------------------------------------------------------- integrate

Outcome cmd_integrate(const SourceForm& s, int m)
{
  Outcome o;
  const FubiniResult r = integrate_fubini(s, m);
  o.result = report::fubini(r);
  std::ostringstream t;
  if (r.total) {
    t << to_string(*r.total, r.names) << "\n";
  } else if (!r.regions.empty()) {
    for (const auto& reg : r.regions) t << "on " << to_string(reg.base) << ": " << to_string(reg.value, r.names) << "\n";
  } else {
    for (std::size_t k = 0; k < r.pieces.size(); ++k) {
      const auto& p = r.pieces[k];
      t << piece_label(k, p.source) << " in " << to_string(p.nc.cell.prefix(p.value.nvars)) << ": "
        << to_string(p.value, p.nc.cell.prefix(p.value.nvars).names()) << "\n";
    }
  }
  for (const auto& a : r.assumptions) t << "assuming " << a << "\n";
  o.text = t.str();
  return o;
}

// ---------------------------------------------------------------- check-integrability

Outcome cmd_check(const SourceForm& s, Hypothesis h)
{
  Outcome o;
  const auto pieces = prepare(s);
  json ps = json::array();
  std::ostringstream t;
  bool all = true;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    json jp;
    jp["source"] = report::cell(p.nc.source);
    if (p.nc.source.size() == 0 || !p.nc.source.vars.back().fat) {
      jp["verdict"] = nullptr;
      jp["note"] = "thin in the last variable";
      ps.push_back(jp);
      t << piece_label(k, p.nc.source) << ": thin, nothing to integrate\n";
      continue;
    }
    const CExpr f = fiber_integrand(p);
    const auto names = p.nc.cell.names();
    const SumVerdict v = sum_integrable_last(f, p.nc.cell, h);
    jp["integrand"] = report::expr(f, names);
    jp["verdict"] = report::verdict(v, names);
    ps.push_back(jp);
    all = all && v.integrable;
    t << piece_label(k, p.nc.source) << ": " << (v.integrable ? "integrable" : "not integrable");
    if (v.report) t << " (rbar = " << to_string(v.report->rbar) << ")";
    if (!v.note.empty()) t << " [" << v.note << "]";
    t << "\n";
  }
  o.result = {{"integrable", all}, {"hypothesis", h == Hypothesis::Dense ? "dense" : "all"}, {"pieces", ps}};
  o.text = t.str() + (all ? "integrable\n" : "not integrable\n");
  o.status = all ? 0 : 4;
  return o;
}

// ---------------------------------------------------------------- decay-rate

Outcome cmd_decay(const SourceForm& s)
{
  Outcome o;
  const auto pieces = prepare(s);
  json ps = json::array();
  std::ostringstream t;
  int found = 0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    const Cell& src = p.nc.source;
    if (src.size() == 0 || !src.vars.back().fat) continue;
    const VarSpec& v = src.vars.back();
    if (v.upper.kind != Bound::Kind::PosInf && v.lower.kind != Bound::Kind::NegInf) continue;
    const auto names = p.nc.cell.names();
    const DecayResult d = decay_rate(p.terms, p.nc.cell);
    ++found;
    json jp;
    jp["source"] = report::cell(src);
    jp["cell"] = report::cell(p.nc.cell);
    jp["prepared"] = report::expr(p.terms, names);
    jp["decay"] = report::decay(d, names);
    ps.push_back(jp);
    // Normalized coordinates get their own names so the map back reads clearly.
    const auto tn = default_names(p.nc.cell.size(), "t");
    const std::vector<std::string> base(tn.begin(), tn.end() - 1);
    t << piece_label(k, src) << ": r = " << to_string(d.r) << "\n  " << v.name << " = "
      << to_string(p.nc.G.back(), tn) << "\n  |f| <= " << tn.back() << "^(" << to_string(d.r) << ") for " << tn.back()
      << " < " << d.g_text(base) << "\n";
  }
  if (found == 0) fail(ErrorKind::DomainError, "no piece is unbounded in the last variable");
  o.result = {{"pieces", ps}};
  o.text = t.str();
  return o;
}

// ---------------------------------------------------------------- sliver

Outcome cmd_sliver(const SourceForm& s, std::uint64_t seed)
{
  Outcome o;
  o.oracle_used = true;
  const auto pieces = prepare(s);
  std::mt19937_64 rng(seed);
  const int samples = oracle_samples(1000);
  json ps = json::array();
  std::ostringstream t;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    json jp;
    jp["source"] = report::cell(p.nc.source);
    try {
      const HTransform h = transform_H(p.nc.cell);
      const Sliver sl = build_sliver(h.cell);
      jp["cell"] = report::cell(h.cell);
      jp["sliver"] = report::sliver(sl);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      int inside = 0;
      const double log_eps = std::log(to_double(sl.epsilon));
      for (int i = 0; i < samples; ++i) {
        const double log_t1 = log_eps + std::log(std::max(u(rng), 1e-300));
        std::vector<double> tt;
        for (const auto& iv : sl.box) tt.push_back(to_double(iv.lo) + (to_double(iv.hi) - to_double(iv.lo)) * u(rng));
        inside += sliver_point_in_cell(h.cell, log_t1, tt) ? 1 : 0;
      }
      jp["samples"] = samples;
      jp["inside"] = inside;
      t << piece_label(k, p.nc.source) << ": epsilon = " << to_string(sl.epsilon) << ", box";
      for (const auto& iv : sl.box) t << " (" << to_string(iv.lo) << ", " << to_string(iv.hi) << ")";
      t << ", " << inside << "/" << samples << " samples inside\n";
    } catch (const Error& e) {
      jp["error"] = report::error(e);
      t << piece_label(k, p.nc.source) << ": " << e.what() << "\n";
    }
    ps.push_back(jp);
  }
  o.result = {{"pieces", ps}};
  o.text = t.str();
  return o;
}

// ---------------------------------------------------------------- eval

Outcome cmd_eval(const SourceForm& s, const std::string& at)
{
  Outcome o;
  o.oracle_used = true;
  const int n = static_cast<int>(s.chains.size());
  std::vector<double> x;
  std::vector<Rat> xq;
  bool exact_point = true;
  std::stringstream ss(at);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (auto q = parse_rat(item)) {
      xq.push_back(*q);
      x.push_back(to_double(*q));
      continue;
    }
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') fail(ErrorKind::DomainError, "bad coordinate '" + item + "'");
    exact_point = false;
    x.push_back(d);
  }
  if (static_cast<int>(x.size()) != n)
    fail(ErrorKind::DomainError, "expected " + std::to_string(n) + " coordinates, got " + std::to_string(x.size()));
  const Cell c = source_cell(s);
  if (!oracle::in_cell(c, x)) fail(ErrorKind::DomainError, "point outside the cell");
  const double v = eval_ast(s.expr, x);
  json exact = nullptr;
  if (exact_point) {
    try {
      if (auto q = eval_exact(lower_plain(s.expr, n), xq)) exact = report::rat(*q);
    } catch (const Error&) {
    }
  }
  o.result = {{"value", v}, {"exact", exact}};
  std::ostringstream t;
  t.precision(17);
  t << v;
  if (!exact.is_null()) t << " (exact " << exact.get<std::string>() << ")";
  t << "\n";
  o.text = t.str();
  return o;
}

}  // namespace

namespace {

// ---------------------------------------------------------------- validate

/// Largest relative deviation |a - b| / max(1, |b|) over a check.
struct Check {
  explicit Check(std::string n) : name(std::move(n)) {}

  std::string name;
  int samples = 0;
  int skipped = 0;
  double max_dev = 0;
  bool failed = false;  // a sample that cannot be compared numerically
  std::vector<std::string> notes;

  void add(double a, double b)
  {
    ++samples;
    const double d = std::fabs(a - b) / std::max(1.0, std::fabs(b));
    if (!std::isfinite(d)) failed = true;
    else max_dev = std::max(max_dev, d);
  }
  void add_exact(bool ok)
  {
    ++samples;
    if (!ok) {
      failed = true;
      max_dev = std::max(max_dev, 1.0);
    }
  }
  json to_json(double tol) const
  {
    return {{"name", name},
            {"passed", !failed && max_dev <= tol && samples + skipped > 0},
            {"samples", samples},
            {"skipped", skipped},
            {"max_deviation", max_dev},
            {"notes", notes}};
  }
};

std::vector<double> apply_G_numeric(const NormalizedCell& nc, const std::vector<double>& y)
{
  std::vector<double> x;
  for (const auto& g : nc.G) x.push_back(oracle::eval(g, y));
  return x;
}

std::vector<Check> validate_input(const SourceForm& s, std::mt19937_64& rng, int samples)
{
  Check pull{"pullback"}, prep{"prepared"}, integ{"integrate"}, probe{"integrability"};
  const auto pieces = prepare(s);
  for (const auto& p : pieces) {
    for (int i = 0; i < samples; ++i) {
      const auto y = oracle::sample_point(p.nc.cell, rng);
      const auto x = apply_G_numeric(p.nc, y);
      pull.add(oracle::eval(p.expr, y), eval_ast(s.expr, x));
      prep.add(oracle::eval(p.terms, y), oracle::eval(p.expr, y));
    }
  }

  const Cell& src = pieces.front().nc.source;
  if (src.size() > 0 && src.vars.back().fat) {
    try {
      const FubiniResult r = integrate_fubini(pieces, 1);
      for (const auto& pi : r.pieces) {
        if (pi.measure_zero) continue;
        const Cell base = pi.nc.cell.prefix(pi.value.nvars);
        const CExpr f = mul(pieces[&pi - r.pieces.data()].expr, pi.nc.jacobian);
        for (int i = 0; i < samples; ++i) {
          const auto y = oracle::sample_point(base, rng);
          integ.add(oracle::eval(pi.value, y), oracle::quadrature(f, pi.nc.cell, y).value);
        }
      }
    } catch (const Error& e) {
      // a divergent fiber is checked against the probe below instead
      if (e.kind() == ErrorKind::NotIntegrable) {
        probe.notes.push_back(std::string("integrate skipped: ") + e.what());
      } else if (report::exit_code(e.kind()) == 3) {
        // outside what the exact engine covers; nothing to compare
        ++integ.skipped;
        integ.notes.push_back(e.what());
      } else {
        integ.failed = true;
        integ.notes.push_back(e.what());
      }
    }
    for (const auto& p : pieces) {
      if (!p.nc.cell.vars.back().lower.is_zero()) continue;
      const CExpr f = fiber_integrand(p);
      const bool exact = sum_integrable_last(f, p.nc.cell, Hypothesis::Dense).integrable;
      const Cell base = p.nc.cell.prefix(p.nc.cell.size() - 1);
      for (int i = 0; i < samples; ++i) {
        const auto y = oracle::sample_point(base, rng);
        const auto rep = oracle::divergence_probe(f, p.nc.cell, y);
        if (rep.verdict == oracle::Verdict::Inconclusive) {
          ++probe.skipped;
          continue;
        }
        probe.add_exact((rep.verdict == oracle::Verdict::Converged) == exact);
      }
    }
  }
  std::vector<Check> out{pull, prep};
  if (integ.samples > 0 || !integ.notes.empty()) out.push_back(integ);
  if (probe.samples > 0 || probe.skipped > 0) out.push_back(probe);
  return out;
}

Cell unit_fiber()
{
  return normalize_cell(source_cell(parse_source("1 on {0 < y < 1}"))).cell;
}

std::vector<Check> validate_builtin(std::mt19937_64& rng, int samples)
{
  std::vector<Check> out;

  Check anti{"antiderivative"};
  for (int r2 = -6; r2 <= 6; ++r2) {
    if (r2 == -2) continue;
    const Rat r(r2, 2);
    for (int s = 0; s <= 4; ++s) {
      const CExpr a = antiderivative_pow_log(r, s);
      Term t = make_term(1, 1);
      t.exps[0] = r;
      t.logs[0] = s;
      const bool d_ok = is_zero(sub(differentiate(a, 0), cexpr_term(t)));
      const bool same = is_zero(sub(a, antiderivative_pow_log(r, s, AntiderivativeMethod::Recursion)));
      anti.add_exact(d_ok && same);
    }
  }
  out.push_back(anti);

  Check battery{"probe_battery"};
  for (const Rat& r : {Rat(-3, 2), Rat(-1), Rat(-1, 2)}) {
    for (int s = 0; s <= 3; ++s) {
      const double rd = to_double(r);
      const auto rep = oracle::divergence_probe(
          [&](double y) { return std::pow(y, rd) * std::pow(std::fabs(std::log(y)), s); }, 1.0);
      const bool want = r > -1;
      battery.add_exact(rep.verdict != oracle::Verdict::Inconclusive &&
                        (rep.verdict == oracle::Verdict::Converged) == want);
    }
  }
  out.push_back(battery);

  Check quad{"quadrature"};
  const Cell c = unit_fiber();
  const auto known = [&](const char* text, double value) {
    const SourceForm s = parse_source(std::string(text) + " on {0 < y < 1}");
    quad.add(oracle::quadrature(lower_plain(s.expr, 1), c, {}).value, value);
  };
  known("y^(-1/2)", 2.0);
  known("log(y)", -1.0);
  known("y^(-1/2)*log(y)", -4.0);
  known("y^3 + 2*y", 1.25);
  out.push_back(quad);

  Check spl{"split"};
  std::uniform_int_distribution<int> deg(0, 4), coef(-9, 9);
  for (int k = 0; k < samples; ++k) {
    Poly3 F;
    for (int m = 0; m < 6; ++m) F[{deg(rng), deg(rng), deg(rng)}] += coef(rng);
    spl.add_exact(reconstruct(split(F)) == substitute_ratio(F));
  }
  out.push_back(spl);

  Check integ{"integrate"};
  const Cell cell = normalize_cell(source_cell(parse_source("1 on {0 < x1 < 1, x1^2 < y < x1}"))).cell;
  std::uniform_int_distribution<int> num(-5, 6), lg(0, 2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < samples; ++k) {
    Term t = make_term(2, Rat(coef(rng) == 0 ? 1 : coef(rng)));
    t.exps[0] = Rat(num(rng), 2);
    t.exps[1] = Rat(num(rng), 3);
    t.logs[1] = lg(rng);
    const CExpr e = cexpr_term(t);
    const CExpr v = integrate_last(e, cell);
    const std::vector<double> x1{u(rng)};
    integ.add(oracle::eval(v, x1), oracle::quadrature(e, cell, x1).value);
  }
  out.push_back(integ);
  return out;
}

Outcome cmd_validate(const std::optional<SourceForm>& s, std::uint64_t seed, double tol)
{
  Outcome o;
  o.oracle_used = true;
  std::mt19937_64 rng(seed);
  const auto checks = s ? validate_input(*s, rng, oracle_samples(5)) : validate_builtin(rng, oracle_samples(20));
  json cs = json::array();
  std::ostringstream t;
  bool all = true;
  double worst = 0;
  for (const auto& c : checks) {
    json j = c.to_json(tol);
    all = all && j["passed"].get<bool>();
    worst = std::max(worst, c.max_dev);
    t << (j["passed"].get<bool>() ? "PASS " : "FAIL ") << c.name << ": " << c.samples << " samples, max deviation "
      << c.max_dev;
    if (c.skipped > 0) t << ", " << c.skipped << " skipped";
    t << "\n";
    for (const auto& n : c.notes) t << "  " << n << "\n";
    cs.push_back(j);
  }
  o.result = {{"passed", all}, {"tolerance", tol}, {"max_deviation", worst}, {"checks", cs}};
  o.text = t.str();
  o.status = all ? 0 : 5;
  return o;
}

json envelope(const std::string& command, const Options& opt, const std::optional<SourceForm>& s)
{
  json j;
  j["schema_version"] = report::kSchemaVersion;
  j["tool"] = "cfcalc";
  j["command"] = command;
  j["input"] = s ? json(print_source(*s)) : json(nullptr);
  j["options"] = {{"vars", opt.vars}, {"hypothesis", opt.hypothesis}, {"seed", opt.seed}, {"tol", opt.tol}};
  return j;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Exact integration and asymptotics of constructible functions"};
  app.set_version_flag("--version", kVersion);
  Options opt;
  app.add_option("--input", opt.input, "input .cf file (default: standard input)");
  app.add_flag("--json", opt.json, "print a JSON report");
  app.add_option("--seed", opt.seed, "seed for randomized checks");
  app.add_option("--tol", opt.tol, "relative tolerance for numeric checks");
  app.require_subcommand(1);

  auto* prep = app.add_subcommand("prepare", "split and normalize the cell, prepare the expression");
  auto* integ = app.add_subcommand("integrate", "integrate the last variables");
  integ->add_option("--vars", opt.vars, "number of trailing variables to integrate")->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check-integrability", "fiber integrability in the last variable");
  check->add_option("--hypothesis", opt.hypothesis, "dense or all")->check(CLI::IsMember({"dense", "all"}));
  auto* decay = app.add_subcommand("decay-rate", "decay toward infinity in the last variable");
  auto* sl = app.add_subcommand("sliver", "sliver certificates for every piece");
  auto* ev = app.add_subcommand("eval", "evaluate at a point");
  ev->add_option("--at", opt.at, "comma separated coordinates")->required();
  auto* val = app.add_subcommand("validate", "cross-check against the numeric oracle");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  std::optional<SourceForm> source;
  json out;
  int status = 0;
  try {
    if (sub != val || !opt.input.empty()) source = parse_source(read_input(opt.input));
    out = envelope(command, opt, source);
    Outcome o;
    if (sub == prep) o = cmd_prepare(*source);
    else if (sub == integ) o = cmd_integrate(*source, opt.vars);
    else if (sub == check) o = cmd_check(*source, opt.hypothesis == "all" ? Hypothesis::All : Hypothesis::Dense);
    else if (sub == decay) o = cmd_decay(*source);
    else if (sub == sl) o = cmd_sliver(*source, opt.seed);
    else if (sub == ev) o = cmd_eval(*source, opt.at);
    else o = cmd_validate(source, opt.seed, opt.tol);
    status = o.status;
    out["status"] = status == 0 ? "ok" : "failed";
    out["result"] = o.result;
    out["error"] = nullptr;
    out["provenance"] = {{"version", kVersion}, {"seed", opt.seed}, {"numeric_oracle", o.oracle_used},
                         {"exact_engine", command != "eval"}};
    if (!opt.json) std::cout << o.text;
  } catch (const Error& e) {
    status = report::exit_code(e.kind());
    if (out.is_null()) out = envelope(command, opt, source);
    out["status"] = "error";
    out["result"] = nullptr;
    out["error"] = report::error(e);
    out["provenance"] = {{"version", kVersion}, {"seed", opt.seed}, {"numeric_oracle", false}, {"exact_engine", true}};
    if (!opt.json) std::cerr << "cfcalc: " << e.what() << "\n";
  } catch (const std::exception& e) {
    status = 5;
    if (out.is_null()) out = envelope(command, opt, source);
    out["status"] = "error";
    out["result"] = nullptr;
    out["error"] = {{"kind", "Internal"}, {"message", e.what()}};
    out["provenance"] = {{"version", kVersion}, {"seed", opt.seed}, {"numeric_oracle", false}, {"exact_engine", true}};
    if (!opt.json) std::cerr << "cfcalc: internal error: " << e.what() << "\n";
  }
  out["exit_code"] = status;
  if (opt.json) std::cout << out.dump(2) << "\n";
  return status;
}
