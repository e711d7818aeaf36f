#include "cf/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cf::oracle {

namespace {

double power(double y, const Rat& r)
{
  if (is_integer(r)) return std::pow(y, to_double(r));
  return std::pow(std::fabs(y), to_double(r));
}

double atom_value(const LogAtom& a, const std::vector<double>& p)
{
  switch (a.kind) {
    case LogAtom::Kind::Var: return std::log(std::fabs(p.at(a.pos) - to_double(a.center)));
    case LogAtom::Kind::Const: return std::log(a.prime.get_d());
    case LogAtom::Kind::Unit: return std::log(eval_unit(a.unit, p));
  }
  return 0;
}

}  // namespace

double eval_unit(const PolyUnit& u, const std::vector<double>& p)
{
  double v = to_double(u.constant());
  for (const auto& s : u.summands()) {
    double m = to_double(s.coeff);
    for (std::size_t j = 0; j < s.exps.size(); ++j)
      if (s.exps[j] != 0) m *= power(p.at(j), s.exps[j]);
    v += m;
  }
  return v;
}

double eval(const CExpr& e, const std::vector<double>& p)
{
  double sum = 0;
  for (const auto& t : e.terms) {
    double v = to_double(t.coeff);
    for (int j = 0; j < t.nvars(); ++j) {
      if (t.exps[j] == 0 && t.logs[j] == 0) continue;
      const double y = p.at(j);
      if (y == 0 && (t.exps[j] < 0 || t.logs[j] > 0)) fail(ErrorKind::DomainError, "evaluation at a singular point");
      if (t.exps[j] != 0) v *= power(y, t.exps[j]);
      if (t.logs[j] != 0) v *= std::pow(std::log(std::fabs(y)), t.logs[j]);
    }
    for (const auto& [a, k] : t.extras) v *= std::pow(atom_value(a, p), k);
    if (!t.unit.trivial() || t.unit.constant() != 1) v *= eval_unit(t.unit, p);
    sum += v;
  }
  return sum;
}

double eval_bound(const Bound& b, const std::vector<double>& p)
{
  switch (b.kind) {
    case Bound::Kind::NegInf: return -std::numeric_limits<double>::infinity();
    case Bound::Kind::PosInf: return std::numeric_limits<double>::infinity();
    case Bound::Kind::Finite: break;
  }
  return eval(b.value, p);
}

bool in_cell(const Cell& c, const std::vector<double>& p, double margin)
{
  for (int i = 0; i < c.size(); ++i) {
    const VarSpec& v = c.vars[i];
    const double x = p.at(i);
    const double lo = eval_bound(v.lower, p);
    if (!v.fat) {
      if (std::fabs(x - lo) > 1e-9 * (1 + std::fabs(lo))) return false;
      continue;
    }
    const double hi = eval_bound(v.upper, p);
    const double slack_lo = std::isfinite(lo) ? margin * std::fabs(lo) : 0;
    const double slack_hi = std::isfinite(hi) ? margin * std::fabs(hi) : 0;
    if (!(x > lo + slack_lo && x < hi - slack_hi)) return false;
  }
  return true;
}

double eval_in_cell(const CExpr& e, const Cell& c, const std::vector<double>& p)
{
  if (!in_cell(c, p)) fail(ErrorKind::DomainError, "point outside the cell");
  return eval(e, p);
}

std::vector<double> sample_point(const Cell& c, std::mt19937_64& rng, double inset)
{
  std::uniform_real_distribution<double> u(inset, 1.0 - inset);
  std::vector<double> p(static_cast<std::size_t>(c.size()), 0.0);
  for (int i = 0; i < c.size(); ++i) {
    const VarSpec& v = c.vars[i];
    double lo = eval_bound(v.lower, p);
    if (!v.fat) {
      p[i] = lo;
      continue;
    }
    double hi = eval_bound(v.upper, p);
    if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi - 10.0 : -10.0;
    if (!std::isfinite(hi)) hi = lo + 10.0;
    p[i] = lo + (hi - lo) * u(rng);
  }
  return p;
}

namespace {

// Double exponential quadrature on (0, 1). Kronrod bisection stalls on
// integrands whose error estimate never reaches the tolerance (x^(1/3) near a
// tiny lower end takes millions of evaluations); tanh-sinh does not. A shallow
// Kronrod pass is kept for the rare function tanh-sinh refuses.
QuadResult unit_interval(const std::function<double(double)>& g)
{
  QuadResult out;
  try {
    static boost::math::quadrature::tanh_sinh<double> ts;
    double l1 = 0;
    std::size_t levels = 0;
    out.value = ts.integrate(g, 0.0, 1.0, 1e-12, &out.error, &l1, &levels);
    if (std::isfinite(out.value)) return out;
  } catch (const std::exception&) {
  }
  out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 10, 1e-12, &out.error);
  return out;
}

}  // namespace

QuadResult integrate_fn(const std::function<double(double)>& f, double a, double b, bool singular_lower, double r_min)
{
  if (!std::isfinite(b)) {
    // y = a + 1/v - 1, v in (0, 1]; the integrand must decay like y^-(1+)
    return unit_interval([&](double v) {
      if (v <= 0) return 0.0;
      return f(a + 1.0 / v - 1.0) / (v * v);
    });
  }
  const double w = b - a;
  if (!singular_lower) {
    return unit_interval([&](double u) {
      const double y = a + w * u;
      if (y <= a || y >= b) return 0.0;
      return f(y) * w;
    });
  }
  if (r_min <= -1) fail(ErrorKind::SingularityTooStrong, "endpoint singularity is not integrable");
  const double k = std::max(1.0, std::ceil(2.0 / (r_min + 1.0)));
  return unit_interval([&](double u) {
    if (u <= 0) return 0.0;
    const double uk1 = std::pow(u, k - 1.0);
    const double y = a + w * uk1 * u;
    if (y <= a) return 0.0;
    return f(y) * w * k * uk1;
  });
}

namespace {

double min_exponent(const CExpr& e, int pos)
{
  // units are bounded above and below, so only the monomial part matters
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : e.terms) r = std::min(r, to_double(t.exps[pos]));
  return std::isfinite(r) ? r : 0.0;
}

}  // namespace

QuadResult quadrature(const CExpr& e, const Cell& c, const std::vector<double>& params)
{
  const int last = c.size() - 1;
  std::vector<double> p = params;
  p.resize(static_cast<std::size_t>(c.size()), 0.0);
  const VarSpec& v = c.vars.at(last);
  const double a = eval_bound(v.lower, p);
  const double b = eval_bound(v.upper, p);
  auto f = [&](double y) {
    std::vector<double> q = p;
    q[last] = y;
    return eval(e, q);
  };
  if (!v.fat) return {};
  const bool singular = v.lower.is_zero();
  const double rmin = singular ? min_exponent(e, last) : 0.0;
  return integrate_fn(f, a, b, singular, rmin);
}

QuadResult quadrature_iterated(const CExpr& e, const Cell& c, int m, const std::vector<double>& params)
{
  const int n = c.size();
  std::vector<double> p = params;
  p.resize(static_cast<std::size_t>(n), 0.0);
  std::function<double(int, std::vector<double>&)> level = [&](int pos, std::vector<double>& q) -> double {
    if (pos == n) return eval(e, q);
    const VarSpec& v = c.vars[pos];
    if (!v.fat) {
      q[pos] = eval_bound(v.lower, q);
      return level(pos + 1, q);
    }
    const double a = eval_bound(v.lower, q);
    const double b = eval_bound(v.upper, q);
    auto f = [&](double y) {
      std::vector<double> r = q;
      r[pos] = y;
      return level(pos + 1, r);
    };
    const bool singular = v.lower.is_zero();
    const double rmin = singular ? std::min(0.0, min_exponent(e, pos)) : 0.0;
    return integrate_fn(f, a, b, singular, rmin).value;
  };
  // fix the leading n - m variables, integrate the rest
  QuadResult out;
  out.value = level(n - m, p);
  return out;
}

ProbeReport divergence_probe(const std::function<double(double)>& f, double b)
{
  using boost::math::quadrature::gauss_kronrod;
  ProbeReport rep;
  constexpr int K = 40;
  std::vector<double> inc(K + 1, 0.0);
  double total = 0;
  for (int k = 1; k <= K; ++k) {
    const double lo = std::ldexp(b, -k);
    const double hi = std::ldexp(b, -k + 1);
    double err = 0;
    // one dyadic segment is far from the singularity; a few levels suffice
    inc[k] = gauss_kronrod<double, 61>::integrate(f, lo, hi, 3, 1e-12, &err);
    total += inc[k];
    rep.partials.push_back(total);
  }
  bool sign_stable = true;
  for (int k = K - 5; k < K; ++k)
    if ((inc[k] > 0) != (inc[k + 1] > 0) || inc[k] == 0) sign_stable = false;
  if (inc[K - 5] != 0 && inc[K] != 0)
    rep.tail_ratio = std::pow(std::fabs(inc[K]) / std::fabs(inc[K - 5]), 1.0 / 5.0);
  if (std::fabs(total) > 1e6) {
    rep.verdict = Verdict::Diverged;
    rep.model = Growth::Power;
    return rep;
  }
  if (!sign_stable) return rep;
  if (rep.tail_ratio <= 0.85) {
    rep.verdict = Verdict::Converged;
  } else if (rep.tail_ratio >= 0.97) {
    rep.verdict = Verdict::Diverged;
    // Geometric increments keep their ratio; polylog ones drift toward 1 like
    // 1 + m/k, so compare with an earlier window.
    double early = 0;
    if (inc[K - 15] != 0 && inc[K - 10] != 0) early = std::pow(std::fabs(inc[K - 10]) / std::fabs(inc[K - 15]), 1.0 / 5.0);
    const bool steady = early > 1 && std::log(rep.tail_ratio) > 0.85 * std::log(early);
    rep.model = rep.tail_ratio > 1.001 && steady ? Growth::Power : Growth::LogLinear;
  }
  return rep;
}

ProbeReport divergence_probe(const CExpr& e, const Cell& c, const std::vector<double>& params)
{
  const int last = c.size() - 1;
  std::vector<double> p = params;
  p.resize(static_cast<std::size_t>(c.size()), 0.0);
  const double b = eval_bound(c.vars.at(last).upper, p);
  auto f = [&](double y) {
    std::vector<double> q = p;
    q[last] = y;
    return eval(e, q);
  };
  return divergence_probe(f, b);
}

const char* verdict_name(Verdict v)
{
  switch (v) {
    case Verdict::Converged: return "converged";
    case Verdict::Diverged: return "diverged";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* growth_name(Growth g)
{
  switch (g) {
    case Growth::None: return "none";
    case Growth::Power: return "power";
    case Growth::LogLinear: return "log-linear";
  }
  return "?";
}

}  // namespace cf::oracle
