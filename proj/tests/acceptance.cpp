// Acceptance runner: one line per criterion, nonzero exit if any fails.

#include "cf/analyze.hpp"
#include "cf/cells.hpp"
#include "cf/frontend.hpp"
#include "cf/integrate.hpp"
#include "cf/oracle.hpp"
#include "cf/prepare.hpp"
#include "cf/sliver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace cf;

namespace {

using Rng = std::mt19937_64;

struct Outcome {
  bool pass = true;
  std::string detail;
};

Rat R(long n, long d = 1) { return make_rat(n, d); }

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <class T>
const T& choose(Rng& rng, const std::vector<T>& xs)
{
  return xs[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(xs.size()) - 1))];
}

Cell ncell(const std::string& text) { return normalize_cell(source_cell(parse_source("1 on " + text))).cell; }

std::string var(int i) { return "y" + std::to_string(i + 1); }

std::string mono_text(const Rat& q, const std::vector<Rat>& exps)
{
  std::string s = to_string(q);
  for (std::size_t j = 0; j < exps.size(); ++j)
    if (exps[j] != 0) s += "*" + var(static_cast<int>(j)) + "^(" + to_string(exps[j]) + ")";
  return s;
}

std::vector<double> base_point(const Cell& c, Rng& rng)
{
  std::vector<double> p = oracle::sample_point(c.prefix(c.size() - 1), rng, 0.05);
  return p;
}

/// Appends a term that may start with a minus sign.
void append_term(std::string& expr, const std::string& term)
{
  if (expr.empty()) expr = term;
  else if (term[0] == '-') expr += " - " + term.substr(1);
  else expr += " + " + term;
}

double rel_dev(double got, double want) { return std::fabs(got - want) / std::max(1.0, std::fabs(want)); }

// ---------------------------------------------------------------- 1

Outcome antiderivatives()
{
  Outcome out;
  int cases = 0, good = 0;
  for (int num = -6; num <= 6; ++num) {
    const Rat r = R(num, 2);
    if (r == -1) continue;
    for (int s = 0; s <= 4; ++s) {
      ++cases;
      Term t = make_term(1);
      t.exps[0] = r;
      t.logs[0] = s;
      const CExpr closed = antiderivative_pow_log(r, s, AntiderivativeMethod::ClosedForm);
      const CExpr rec = antiderivative_pow_log(r, s, AntiderivativeMethod::Recursion);
      const bool d_ok = is_zero(normalize(sub(differentiate(closed, 0), cexpr_term(t))));
      const bool same = is_zero(normalize(sub(closed, rec)));
      if (d_ok && same) ++good;
    }
  }
  out.pass = cases == 60 && good == cases;
  out.detail = std::to_string(good) + "/" + std::to_string(cases) + " exact";
  return out;
}

// ---------------------------------------------------------------- 2

struct Instance {
  Cell cell;
  CExpr expr;
  std::string text;
};

/// Normalized cell of n variables whose last fiber is (0 or q*y^a, y^b) and
/// an integrand whose terms are integrable on it. Bound coefficients are 1
/// or 2^-(p k) so every root the integration needs is rational.
Instance closure_instance(Rng& rng)
{
  const int n = uniform(rng, 2, 3);
  const int last = n - 1;
  std::vector<std::string> chains{"0 < y1 < 1"};
  if (n == 3) chains.push_back(choose<std::string>(rng, {"0 < y2 < y1", "y1^2 < y2 < y1", "0 < y2 < 1"}));

  // terms first: p follows from the last-variable exponents
  const bool zero_lower = uniform(rng, 0, 1) == 0;
  std::vector<Rat> rs = zero_lower ? std::vector<Rat>{R(-3, 4), R(-1, 2), R(-1, 3), R(0), R(1, 2), R(1), R(3, 2), R(2)}
                                   : std::vector<Rat>{R(-3), R(-2), R(-1), R(-1, 2), R(0), R(1, 3), R(1), R(5, 2)};
  const std::vector<Rat> bs{R(-1), R(-1, 2), R(0), R(1, 2), R(1), R(2)};
  const int nterms = uniform(rng, 1, 3);
  std::vector<std::string> terms;
  std::vector<Rat> lastexps;
  for (int k = 0; k < nterms; ++k) {
    std::vector<Rat> e(static_cast<std::size_t>(n), Rat(0));
    for (int j = 0; j < last; ++j) e[j] = choose(rng, bs);
    e[last] = choose(rng, rs);
    lastexps.push_back(e[last]);
    std::string t = mono_text(R(uniform(rng, 1, 9) * (uniform(rng, 0, 1) ? 1 : -1), uniform(rng, 1, 4)), e);
    for (int j = 0; j < n; ++j) {
      const int l = uniform(rng, 0, j == last ? 2 : 1);
      if (l > 0) t += "*log(" + var(j) + ")^" + std::to_string(l);
    }
    if (uniform(rng, 0, 4) == 0) t += "*log(3)";
    terms.push_back(t);
  }
  const long p = lcm_of_denominators(lastexps).get_si();

  std::vector<Rat> up(static_cast<std::size_t>(last), Rat(0));
  up[0] = choose<Rat>(rng, {R(0), R(1), R(2), R(1, 2)});
  if (n == 3) up[1] = choose<Rat>(rng, {R(0), R(1, 2), R(1)});
  const Rat ucoef = uniform(rng, 0, 2) == 0 ? Rat(1) / pow_int(Rat(2), p) : Rat(1);
  std::string lower = "0";
  if (!zero_lower) {
    std::vector<Rat> lo = up;
    lo[0] += choose<Rat>(rng, {R(0), R(1), R(2)});
    const Rat lcoef = lo == up ? Rat(ucoef / pow_int(Rat(2), p)) : Rat(ucoef * choose<Rat>(rng, {R(1), Rat(1) / pow_int(Rat(2), p)}));
    lower = mono_text(lcoef, lo);
  }
  chains.push_back(lower + " < " + var(last) + " < " + mono_text(ucoef, up));

  std::string cell = "{";
  for (std::size_t k = 0; k < chains.size(); ++k) cell += (k ? ", " : "") + chains[k];
  cell += "}";
  std::string expr;
  for (const auto& t : terms) append_term(expr, t);

  std::vector<std::string> names;
  for (int j = 0; j < n; ++j) names.push_back(var(j));
  Instance ins;
  ins.cell = ncell(cell);
  ins.expr = normalize(lower_plain(parse_expr(expr, names), n));
  ins.text = expr + " on " + cell;
  return ins;
}

bool structurally_valid(const CExpr& v, int base)
{
  if (v.nvars != base || !is_normalized(v)) return false;
  for (const auto& t : v.terms) {
    if (t.coeff == 0) return false;
    for (const auto& [a, k] : t.extras)
      if (k <= 0 || (a.kind == LogAtom::Kind::Var && a.pos >= base)) return false;
  }
  return true;
}

Outcome closure(Rng& rng)
{
  Outcome out;
  int done = 0, bad = 0, points = 0;
  double worst = 0;
  std::string first_bad;
  while (done < 200) {
    Instance ins = closure_instance(rng);
    CExpr v;
    try {
      v = integrate_last(ins.expr, ins.cell);
    } catch (const Error& e) {
      ++bad;
      if (first_bad.empty()) first_bad = ins.text + ": " + e.what();
      ++done;
      continue;
    }
    ++done;
    bool ok = structurally_valid(v, ins.cell.size() - 1);
    for (int k = 0; k < 5; ++k) {
      const auto p = base_point(ins.cell, rng);
      const double sym = oracle::eval(v, p);
      const double num = oracle::quadrature(ins.expr, ins.cell, p).value;
      ++points;
      const double dev = std::fabs(sym - num);
      const double tol = std::max(1e-8, 1e-8 * std::fabs(sym));
      worst = std::max(worst, dev / tol);
      if (!(dev <= tol)) ok = false;
    }
    if (!ok) {
      ++bad;
      if (first_bad.empty()) first_bad = ins.text;
    }
  }
  out.pass = bad == 0;
  std::ostringstream s;
  s << done - bad << "/" << done << " instances, " << points << " points, worst deviation " << worst << " x tol";
  if (!first_bad.empty()) s << "; first failure: " << first_bad;
  out.detail = s.str();
  return out;
}

// ---------------------------------------------------------------- 3

Outcome equivalence(Rng& rng)
{
  Outcome out;
  int and_ok = 0, agree = 0, disagree = 0, inconclusive = 0;
  const int total = 300;
  std::string first_bad;
  const std::vector<std::string> cells{"{0 < y1 < 1, 0 < y2 < y1}", "{0 < y1 < 1, 0 < y2 < 1}",
                                       "{0 < y1 < 1, 0 < y2 < y1^2}", "{0 < y1 < 1, 0 < y2 < 1, 0 < y3 < y1*y2}"};
  for (int k = 0; k < total; ++k) {
    const Cell c = ncell(choose(rng, cells));
    const int n = c.size();
    CExpr e{n, {}};
    std::set<std::vector<int>> sigs;
    const int nterms = uniform(rng, 1, 4);
    while (static_cast<int>(e.terms.size()) < nterms) {
      Term t = make_term(n, R(uniform(rng, 1, 9) * (uniform(rng, 0, 1) ? 1 : -1), uniform(rng, 1, 3)));
      std::vector<int> sig;
      for (int j = 0; j < n; ++j) {
        t.exps[j] = R(uniform(rng, -4, 4), 2);
        t.logs[j] = uniform(rng, 0, 3);
        sig.push_back(static_cast<int>(to_double(t.exps[j]) * 2));
        sig.push_back(t.logs[j]);
      }
      if (!sigs.insert(sig).second) continue;
      e.terms.push_back(t);
    }
    e = normalize(e);
    const SumVerdict v = sum_integrable_last(e, c, Hypothesis::Dense);
    bool all = true;
    for (const auto& t : e.terms) all = all && term_integrable_last(t, c);
    bool per_term_ok = v.per_term.size() == e.terms.size();
    for (std::size_t i = 0; per_term_ok && i < e.terms.size(); ++i)
      per_term_ok = v.per_term[i] == term_integrable_last(e.terms[i], c);
    if (v.integrable == all && per_term_ok) ++and_ok;
    else if (first_bad.empty()) first_bad = to_string(e, c.names());

    const auto p = base_point(c, rng);
    const auto probe = oracle::divergence_probe(e, c, p);
    if (probe.verdict == oracle::Verdict::Inconclusive) {
      ++inconclusive;
      continue;
    }
    if ((probe.verdict == oracle::Verdict::Converged) == v.integrable) ++agree;
    else ++disagree;
  }
  const int decided = agree + disagree;
  const double rate = decided ? static_cast<double>(agree) / decided : 0.0;
  out.pass = and_ok == total && decided > 0 && rate >= 0.99;
  std::ostringstream s;
  s << "AND rule " << and_ok << "/" << total << ", probe agreement " << agree << "/" << decided << " ("
    << rate * 100 << "%), inconclusive " << inconclusive;
  if (!first_bad.empty()) s << "; first AND mismatch: " << first_bad;
  out.detail = s.str();
  return out;
}

// ---------------------------------------------------------------- 4

struct DecayCheck {
  int violations = 0;
  int points = 0;
};

/// 20 x 20 grid: base x1 log-spaced in (0, 1), x log-spaced over six decades
/// above the threshold at that base point.
DecayCheck decay_grid(const Ast& f, const DecayResult& d, bool has_base)
{
  DecayCheck out;
  const int rows = has_base ? 20 : 1;
  for (int i = 0; i < rows; ++i) {
    std::vector<double> base;
    if (has_base) base.push_back(std::pow(10.0, -3.0 + 2.95 * i / 19.0));
    const double x0 = 1 / d.threshold(base);
    for (int k = 0; k < 20; ++k) {
      const double x = x0 * std::pow(10.0, 6.0 * k / 19.0) * (1 + 1e-12);
      std::vector<double> pt = base;
      pt.push_back(x);
      ++out.points;
      if (!(std::fabs(eval_ast(f, pt)) <= std::pow(x, -to_double(d.r)))) ++out.violations;
    }
  }
  return out;
}

Outcome decay(Rng& rng)
{
  Outcome out;
  int violations = 0, points = 0, instances = 0;
  std::string first_bad;
  const SourceForm cell = parse_source("1 on {0 < x1 < 1, 1 < x < inf}");
  const NormalizedCell nc = normalize_cell(source_cell(cell));
  const std::vector<std::string> names{"x1", "x"};
  while (instances < 50) {
    std::string text;
    const int nterms = uniform(rng, 1, 3);
    for (int k = 0; k < nterms; ++k) {
      std::string t = to_string(R(uniform(rng, 1, 9) * (uniform(rng, 0, 1) ? 1 : -1), uniform(rng, 1, 3)));
      t += "*x1^(" + to_string(R(uniform(rng, -2, 4), 2)) + ")";
      t += "*x^(" + to_string(R(-uniform(rng, 1, 12), 4)) + ")";
      if (int l = uniform(rng, 0, 3)) t += "*log(x)^" + std::to_string(l);
      if (int l = uniform(rng, 0, 1)) t += "*log(x1)^" + std::to_string(l);
      append_term(text, t);
    }
    const Ast f = parse_expr(text, names);
    const CExpr e = normalize(compose(normalize(lower_plain(f, 2)), nc.G, nc.cell));
    if (e.terms.empty()) continue;
    ++instances;
    try {
      const DecayResult d = decay_rate(e, nc.cell);
      const DecayCheck g = decay_grid(f, d, true);
      violations += g.violations;
      points += g.points;
      if (g.violations && first_bad.empty()) first_bad = text;
    } catch (const Error& err) {
      ++violations;
      if (first_bad.empty()) first_bad = text + ": " + err.what();
    }
  }
  // the worked example
  const NormalizedCell one = normalize_cell(source_cell(parse_source("1 on {1 < x < inf}")));
  const Ast w = parse_expr("x^(-1/3)*log(x)", {"x"});
  const DecayResult dw = decay_rate(compose(lower_plain(w, 1), one.G, one.cell), one.cell);
  const DecayCheck gw = decay_grid(w, dw, false);
  out.pass = violations == 0 && dw.r == R(1, 8) && gw.violations == 0;
  std::ostringstream s;
  s << instances << " instances, " << violations << " violations on " << points << " grid points; worked example r = "
    << to_string(dw.r) << " with " << gw.violations << " violations";
  if (!first_bad.empty()) s << "; first failure: " << first_bad;
  out.detail = s.str();
  return out;
}

// ---------------------------------------------------------------- 5

Outcome slivers(Rng& rng)
{
  Outcome out;
  int ok = 0, samples_in = 0, samples = 0;
  std::string first_bad;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> lower2{"0", "y1/2", "y1^2", "y1^3/4", "y1*(1 + y1)/4"};
  const std::vector<std::string> upper2{"y1", "1", "y1^(1/2)", "y1*(1 + y1)/2"};
  const std::vector<std::string> lower3{"0", "y1*y2/3", "y2^2", "y1^2*y2"};
  const std::vector<std::string> upper3{"y1*y2", "y2", "1"};
  for (int k = 0; k < 50; ++k) {
    const int n = uniform(rng, 2, 3);
    std::string text = "{0 < y1 < 1/2, ";
    // every lower sits below every upper for y1 < 1/2, except y2^2 < y1*y2
    text += choose(rng, lower2) + " < y2 < " + choose(rng, upper2);
    if (n == 3) {
      std::string lo3, up3;
      do {
        lo3 = choose(rng, lower3);
        up3 = choose(rng, upper3);
      } while (lo3 == "y2^2" && up3 == "y1*y2");
      text += ", " + lo3 + " < y3 < " + up3;
    }
    text += "}";
    try {
      const Cell c = ncell(text);
      const HTransform h = transform_H(c);
      const Sliver s = build_sliver(h.cell);
      const double eps = to_double(s.epsilon);
      int inside = 0;
      for (int m = 0; m < 1000; ++m) {
        const double t1 = eps * (1e-9 + (1 - 2e-9) * u(rng));
        std::vector<double> t;
        for (const auto& iv : s.box) t.push_back(to_double(iv.lo) + (to_double(iv.hi) - to_double(iv.lo)) * u(rng));
        if (sliver_point_in_cell(h.cell, std::log(t1), t)) ++inside;
      }
      samples += 1000;
      samples_in += inside;
      if (inside == 1000) ++ok;
      else if (first_bad.empty()) first_bad = text;
    } catch (const Error& e) {
      if (first_bad.empty()) first_bad = text + ": " + e.what();
    }
  }
  out.pass = ok == 50 && samples_in == samples;
  std::ostringstream s;
  s << ok << "/50 slivers, " << samples_in << "/" << samples << " samples inside";
  if (!first_bad.empty()) s << "; first failure: " << first_bad;
  out.detail = s.str();
  return out;
}

// ---------------------------------------------------------------- 6

Outcome splitting(Rng& rng)
{
  Outcome out;
  int ok = 0;
  for (int k = 0; k < 200; ++k) {
    Poly3 F;
    const int nterms = uniform(rng, 1, 10);
    for (int t = 0; t < nterms; ++t) {
      const int c = uniform(rng, -9, 9);
      if (c == 0) continue;
      // total degree at most 6 in (X, Y, Z)
      const int a = uniform(rng, 0, 6);
      const int i = uniform(rng, 0, 6 - a);
      const int j = uniform(rng, 0, 6 - a - i);
      F[{a, i, j}] += R(c, uniform(rng, 1, 7));
    }
    Laurent3 lhs = reconstruct(split(F)), rhs = substitute_ratio(F);
    std::erase_if(lhs, [](const auto& kv) { return kv.second == 0; });
    std::erase_if(rhs, [](const auto& kv) { return kv.second == 0; });
    if (lhs == rhs) ++ok;
  }
  out.pass = ok == 200;
  out.detail = std::to_string(ok) + "/200 exact reconstructions";
  return out;
}

// ---------------------------------------------------------------- 7

Outcome fubini(Rng& rng)
{
  Outcome out;
  int ok = 0;
  std::string first_bad;
  // fibers with their admissible exponent sets; the roots of 1 and 4 needed
  // by these exponents are rational
  struct Fiber {
    std::string lo, hi;
    std::vector<Rat> exps;
  };
  const std::vector<Fiber> fibers{
      {"0", "1", {R(-1, 2), R(-1, 3), R(0), R(1, 2), R(1), R(2)}},
      {"1", "inf", {R(-2), R(-3, 2), R(-3)}},
      {"0", "4", {R(-1, 2), R(0), R(1, 2), R(1), R(3)}},
      {"1", "4", {R(-2), R(-1), R(-1, 2), R(0), R(1, 2), R(2)}},
  };
  for (int k = 0; k < 50; ++k) {
    const Fiber& f1 = choose(rng, fibers);
    const Fiber& f2 = choose(rng, fibers);
    std::string expr;
    const int nterms = uniform(rng, 1, 3);
    for (int t = 0; t < nterms; ++t) {
      std::string term = to_string(R(uniform(rng, 1, 9) * (uniform(rng, 0, 1) ? 1 : -1), uniform(rng, 1, 3)));
      term += "*x1^(" + to_string(choose(rng, f1.exps)) + ")*x2^(" + to_string(choose(rng, f2.exps)) + ")";
      if (int l = uniform(rng, 0, 2)) term += "*log(x1)^" + std::to_string(l);
      if (int l = uniform(rng, 0, 2)) term += "*log(x2)^" + std::to_string(l);
      append_term(expr, term);
    }
    const std::string c1 = f1.lo + " < x1 < " + f1.hi, c2 = f2.lo + " < x2 < " + f2.hi;
    const std::string a = expr + " on {" + c1 + ", " + c2 + "}";
    const std::string b = expr + " on {" + c2 + ", " + c1 + "}";
    try {
      const FubiniResult ra = integrate_fubini(parse_source(a), 2);
      const FubiniResult rb = integrate_fubini(parse_source(b), 2);
      if (ra.total && rb.total && is_zero(normalize(sub(*ra.total, *rb.total)))) {
        ++ok;
        continue;
      }
    } catch (const Error& e) {
      if (first_bad.empty()) first_bad = a + ": " + e.what();
      continue;
    }
    if (first_bad.empty()) first_bad = a;
  }
  const FubiniResult tri = integrate_fubini(parse_source("y2^(-1/2) on {0 < y1 < 1, 0 < y2 < y1}"), 2);
  const bool tri_ok = tri.total && to_string(*tri.total, {}) == "4/3";
  out.pass = ok == 50 && tri_ok;
  std::ostringstream s;
  s << ok << "/50 order swaps agree exactly; triangle gives " << (tri.total ? to_string(*tri.total, {}) : "nothing");
  if (!first_bad.empty()) s << "; first failure: " << first_bad;
  out.detail = s.str();
  return out;
}

// ---------------------------------------------------------------- 8

Outcome battery()
{
  Outcome out;
  const Cell c = ncell("{0 < y1 < 1}");
  int right = 0;
  for (const char* r : {"-3/2", "-1", "-1/2"})
    for (int s = 0; s <= 3; ++s) {
      std::string text = std::string("y1^(") + r + ")";
      if (s > 0) text += "*log(y1)^" + std::to_string(s);
      const auto p = oracle::divergence_probe(lower_plain(parse_expr(text, {"y1"}), 1), c, {});
      const bool conv = std::string(r) == "-1/2";
      if (p.verdict == (conv ? oracle::Verdict::Converged : oracle::Verdict::Diverged)) ++right;
    }
  // closed forms int_0^1 y^r log(y)^s = (-1)^s s!/(r+1)^(s+1), within 1e-9
  int quad_ok = 0, quad_n = 0;
  double worst = 0;
  for (const char* r : {"0", "1", "2", "5", "-1/2", "-1/3", "1/2", "3/4", "-3/4", "7/3"})
    for (int s : {0, 1}) {
      const std::string text = std::string("y1^(") + r + ")" + (s ? "*log(y1)" : "");
      const double rr = to_double(*parse_rat(r));
      const double want = (s ? -1.0 : 1.0) / std::pow(rr + 1, s + 1);
      const double got = oracle::quadrature(lower_plain(parse_expr(text, {"y1"}), 1), c, {}).value;
      ++quad_n;
      worst = std::max(worst, rel_dev(got, want));
      if (rel_dev(got, want) <= 1e-9) ++quad_ok;
    }
  out.pass = right == 12 && quad_ok == quad_n;
  std::ostringstream s;
  s << right << "/12 probe verdicts, " << quad_ok << "/" << quad_n << " quadratures within 1e-9 (worst " << worst << ")";
  out.detail = s.str();
  return out;
}

}  // namespace

int main()
{
  Rng rng(20240611);
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double limit_s;  // 0 = no runtime bound
  };
  const std::vector<Criterion> all{
      {1, "antiderivative suite", [] { return antiderivatives(); }, 5.0},
      {2, "closure against quadrature", [&] { return closure(rng); }, 120.0},
      {3, "sum verdict equivalence", [&] { return equivalence(rng); }, 0},
      {4, "decay bounds", [&] { return decay(rng); }, 0},
      {5, "sliver containment", [&] { return slivers(rng); }, 0},
      {6, "split reconstruction", [&] { return splitting(rng); }, 0},
      {7, "fubini order swap", [&] { return fubini(rng); }, 0},
      {8, "oracle calibration", [] { return battery(); }, 0},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) {
      o.pass = false;
      o.detail += "; over the time limit";
    }
    all_pass = all_pass && o.pass;
    std::printf("%s %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
