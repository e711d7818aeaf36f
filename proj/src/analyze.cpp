#include "cf/analyze.hpp"

#include "cf/frontend.hpp"

#include <algorithm>
#include <cmath>

namespace cf {

bool term_integrable_last(const Term& t, const Cell& c)
{
  if (!c.normalized()) fail(ErrorKind::NotPrepared, "integrability test needs a normalized cell");
  const int last = c.size() - 1;
  if (last < 0) fail(ErrorKind::NotPrepared, "empty cell");
  if (t.nvars() != c.size()) fail(ErrorKind::NotPrepared, "term and cell sizes differ");
  if (!c.vars[last].lower.is_zero()) return true;
  return t.exps[last] > -1;
}

// ---------------------------------------------------------------- dominance

namespace {

double extras_factor_at_origin(const Term& t)
{
  double f = 1;
  for (const auto& [a, k] : t.extras) {
    switch (a.kind) {
      case LogAtom::Kind::Const: f *= std::pow(std::log(a.prime.get_d()), k); break;
      case LogAtom::Kind::Unit: {
        const Rat u0 = a.unit.constant();
        if (u0 <= 0) fail(ErrorKind::NotPrepared, "log of a unit vanishing at the origin");
        f *= std::pow(std::log(to_double(u0)), k);
        break;
      }
      case LogAtom::Kind::Var: fail(ErrorKind::NotPrepared, "shifted logarithm in a prepared term");
    }
  }
  return f;
}

struct LeadPoly {
  std::vector<double> a;
  std::vector<std::vector<int>> powers;  // per term, per box coordinate

  double eval(const std::vector<double>& t) const
  {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double m = a[i];
      for (std::size_t k = 0; k < t.size(); ++k) m *= std::pow(t[k], powers[i][k]);
      s += m;
    }
    return s;
  }

  double variation(const Box& box) const
  {
    double v = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double hi = 1, lo = 1;
      for (std::size_t k = 0; k < box.size(); ++k) {
        hi *= std::pow(to_double(box[k].hi), powers[i][k]);
        lo *= std::pow(to_double(box[k].lo), powers[i][k]);
      }
      v += std::fabs(a[i]) * (hi - lo);
    }
    return v;
  }
};

std::vector<double> to_doubles(const std::vector<Rat>& v)
{
  std::vector<double> r;
  for (const auto& x : v) r.push_back(to_double(x));
  return r;
}

}  // namespace

DominanceReport dominance(const CExpr& e, const Cell& c)
{
  if (e.terms.empty()) fail(ErrorKind::EmptyExpr, "dominance of an empty sum");
  if (!c.normalized()) fail(ErrorKind::NotPrepared, "dominance needs a normalized cell");
  const int n = c.size();
  const int last = n - 1;
  const AsymClass cls = classify(c);
  for (int i = 0; i < n; ++i)
    if (cls.determined[i]) fail(ErrorKind::NotAllUndetermined, c.vars[i].name + " is determined");
  const auto& T = e.terms;

  DominanceReport rep;
  rep.rbar = T[0].exps[last];
  for (const auto& t : T)
    if (t.exps[last] < rep.rbar) rep.rbar = t.exps[last];
  for (int i = 0; i < static_cast<int>(T.size()); ++i)
    if (T[i].exps[last] == rep.rbar) rep.I1.push_back(i);
  rep.lbar = 0;
  for (int i : rep.I1) rep.lbar = std::max(rep.lbar, T[i].logs[last]);
  for (int i : rep.I1)
    if (T[i].logs[last] == rep.lbar) rep.I2.push_back(i);

  const Cell base = c.prefix(last);
  rep.sliver = last > 0 ? build_sliver(base) : Sliver{Rat(1, 2), {}, {}, {}};

  auto base_exps = [&](const ExpVec& x) { return ExpVec(x.begin(), x.begin() + last); };
  std::vector<AffineForm> forms;
  for (int i : rep.I2) forms.push_back(pull_exponent(base_exps(T[i].exps)));
  const Separation sep = separate(forms, rep.sliver.box);
  rep.margin = sep.margin;
  if (!rep.sliver.box.empty()) rep.sliver = restrict_box(rep.sliver, sep.box, "separation");
  const AffineForm chosen = forms[sep.index];
  for (std::size_t k = 0; k < rep.I2.size(); ++k)
    if (forms[k] == chosen) rep.I3.push_back(rep.I2[k]);

  auto base_logs = [&](const Term& t) {
    int s = 0;
    for (int k = 0; k < last; ++k) s += t.logs[k];
    return s;
  };
  rep.lbar_prime = 0;
  for (int i : rep.I3) rep.lbar_prime = std::max(rep.lbar_prime, base_logs(T[i]));
  for (int i : rep.I3)
    if (base_logs(T[i]) == rep.lbar_prime) rep.I4.push_back(i);

  // units tend to their constants along the sliver once every summand decays
  LeadPoly P;
  for (int i : rep.I4) {
    const Term& t = T[i];
    for (const auto& s : t.unit.summands()) {
      if (static_cast<int>(s.exps.size()) > last && s.exps[last] > 0) continue;
      if (static_cast<int>(s.exps.size()) > last && s.exps[last] < 0)
        fail(ErrorKind::NotPrepared, "unit unbounded as the last variable tends to 0");
      ExpVec be = s.exps;
      be.resize(static_cast<std::size_t>(last), Rat(0));
      if (all_zero(be)) continue;
      rep.sliver = shrink_for_decay(be, rep.sliver).sliver;
    }
    const Rat u0 = t.unit.constant();
    if (u0 == 0) fail(ErrorKind::NotPrepared, "unit vanishes at the origin");
    P.a.push_back(to_double(t.coeff * u0) * extras_factor_at_origin(t));
    std::vector<int> pw;
    for (int k = 1; k < last; ++k) pw.push_back(t.logs[k]);
    P.powers.push_back(pw);
  }

  // a point of the box where the leading polynomial is clearly nonzero, and a
  // sub-box around it keeping the sign
  Box box = rep.sliver.box;
  std::vector<Rat> best;
  double best_val = 0;
  const Rat fr[] = {Rat(1, 2), Rat(1, 4), Rat(3, 4), Rat(1, 3), Rat(2, 3), Rat(1, 8), Rat(7, 8)};
  const int m = static_cast<int>(box.size());
  int tries = 1;
  for (int k = 0; k < m; ++k) tries *= 7;
  tries = std::min(tries, 343);
  for (int a = 0; a < tries; ++a) {
    std::vector<Rat> p(static_cast<std::size_t>(m));
    int code = a;
    for (int k = 0; k < m; ++k) {
      p[k] = box[k].lo + (box[k].hi - box[k].lo) * fr[code % 7];
      code /= 7;
    }
    const double v = P.eval(to_doubles(p));
    if (best.empty() && m > 0 && a == 0) best = p;
    if (std::fabs(v) > std::fabs(best_val)) {
      best_val = v;
      best = p;
    }
  }
  if (best_val == 0) fail(ErrorKind::NotPrepared, "leading coefficient vanishes on the sliver box");
  if (m > 0) {
    Rat h = Rat(1, 4);
    for (int k = 0; k < 200; ++k, h /= 2) {
      Box V(box.size());
      for (int j = 0; j < m; ++j) {
        const Rat w = (box[j].hi - box[j].lo) * h;
        V[j].lo = std::max(box[j].lo, Rat(best[j] - w));
        V[j].hi = std::min(box[j].hi, Rat(best[j] + w));
      }
      if (P.variation(V) < std::fabs(best_val) / 2) {
        rep.sliver = restrict_box(rep.sliver, V, "leading coefficient");
        break;
      }
    }
  }
  rep.probe_point = best;
  rep.leading_value = best_val;

  rep.W = make_term(n);
  for (int k = 0; k < last; ++k) rep.W.exps[k] = T[rep.I4.front()].exps[k];
  rep.W.exps[last] = rep.rbar;
  rep.W.logs[last] = rep.lbar;
  if (last > 0) rep.W.logs[0] += rep.lbar_prime;
  return rep;
}

SumVerdict sum_integrable_last(const CExpr& e, const Cell& c, Hypothesis h)
{
  SumVerdict v;
  bool all = true;
  for (const auto& t : e.terms) {
    const bool ok = term_integrable_last(t, c);
    v.per_term.push_back(ok);
    all = all && ok;
  }
  v.integrable = all;
  if (e.terms.empty() || h == Hypothesis::All) return v;
  if (!c.vars.back().lower.is_zero()) {
    v.note = "fiber bounded away from 0";
    return v;
  }
  try {
    v.report = dominance(e, c);
    v.integrable = v.report->rbar > -1;
  } catch (const Error& err) {
    v.note = std::string("no dominance report: ") + err.what();
  }
  return v;
}

IntegrableLocus integrable_locus(const std::vector<PreparedPiece>& pieces)
{
  IntegrableLocus out;
  for (const auto& p : pieces) {
    const Cell& src = p.nc.source;
    if (src.size() == 0 || !src.vars.back().fat || p.nc.cell.size() == 0) {
      out.discarded.push_back(src);
      continue;
    }
    if (sum_integrable_last(fiber_integrand(p), p.nc.cell, Hypothesis::All).integrable) out.kept.push_back(src);
    else out.discarded.push_back(src);
  }
  if (!out.kept.empty())
    out.assumptions.push_back("the kept fibers are taken to be dense in each fiber of the input region");
  return out;
}

// ---------------------------------------------------------------- majorant

double Majorant::eval(const std::vector<double>& x) const
{
  double s = 0;
  for (const auto& p : pieces) {
    double v = to_double(p.coeff) * p.factor;
    for (int j = 0; j < nvars; ++j) {
      const double xj = std::fabs(x.at(j));
      if (p.exps[j] != 0) v *= std::pow(xj, to_double(p.exps[j]));
      if (p.lplus[j] != 0) v *= std::pow(xj <= 1 ? 1 / xj : xj, p.lplus[j]);
    }
    s += v;
  }
  return std::max(1.0, s);
}

std::string Majorant::text(const std::vector<std::string>& names) const
{
  std::string s = "max{1";
  bool any = false;
  for (const auto& p : pieces) {
    const bool constant = all_zero(p.exps) && std::all_of(p.lplus.begin(), p.lplus.end(), [](int k) { return k == 0; });
    if (constant && to_double(p.coeff) * p.factor <= 1) continue;
    any = true;
    s += ", ";
    std::string body = to_string(p.coeff);
    for (int j = 0; j < nvars; ++j) {
      if (p.exps[j] != 0) body += "*" + names.at(j) + "^(" + to_string(p.exps[j]) + ")";
      if (p.lplus[j] != 0) body += "*Lplus(" + names.at(j) + ")^" + std::to_string(p.lplus[j]);
    }
    if (p.factor != 1) body += "*" + std::to_string(p.factor);
    s += body;
  }
  return any ? s + "}" : "1";
}

namespace {

Majorant bound_impl(const CExpr& e, int drop)
{
  Majorant h;
  h.nvars = e.nvars;
  for (const auto& t : e.terms) {
    Majorant::Piece p;
    p.coeff = rat_abs(t.coeff) * rat_abs(t.unit.trivial() ? t.unit.constant() : t.unit.upper_bound());
    p.exps = t.exps;
    p.lplus = t.logs;
    if (drop >= 0) {
      p.exps[drop] = 0;
      p.lplus[drop] = 0;
    }
    for (const auto& [a, k] : t.extras) {
      switch (a.kind) {
        case LogAtom::Kind::Const: p.factor *= std::pow(std::log(a.prime.get_d()), k); break;
        case LogAtom::Kind::Unit: {
          const double lo = std::fabs(std::log(to_double(a.unit.lower_bound())));
          const double hi = std::fabs(std::log(to_double(a.unit.upper_bound())));
          p.factor *= std::pow(std::max(lo, hi) * (1 + 1e-12), k);
          break;
        }
        case LogAtom::Kind::Var: fail(ErrorKind::NotBounded, "shifted logarithm has no monomial majorant");
      }
    }
    h.pieces.push_back(std::move(p));
  }
  return h;
}

}  // namespace

Majorant subanalytic_bound(const CExpr& e) { return bound_impl(e, -1); }
Majorant subanalytic_bound_base(const CExpr& e, int drop) { return bound_impl(e, drop); }

// ---------------------------------------------------------------- decay

double DecayResult::threshold(const std::vector<double>& base) const
{
  std::vector<double> x = base;
  x.resize(static_cast<std::size_t>(h.nvars), 1.0);
  return std::min(to_double(delta), std::pow(h.eval(x), to_double(g_exponent)));
}

std::string DecayResult::g_text(const std::vector<std::string>& names) const
{
  const std::string ht = h.text(names);
  if (ht == "1") return to_string(delta);
  return "min{" + to_string(delta) + ", " + ht + "^(" + to_string(g_exponent) + ")}";
}

namespace {

// 2^-k with |log y| <= y^-kappa on (0, 2^-k].
Rat log_power_threshold(const Rat& kappa)
{
  const double kap = to_double(kappa);
  const double ln2 = std::log(2.0);
  for (long k = 1; k < 100000; ++k) {
    const double kd = static_cast<double>(k);
    if (kd * ln2 * kap <= 1.0 * (1 + 1e-12)) continue;
    if (std::exp2(-kd * kap) * kd * ln2 <= 1.0 - 1e-12) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k));
      return Rat(1) / Rat(p);
    }
  }
  fail(ErrorKind::NoDecay, "log threshold underflows");
}

}  // namespace

DecayResult decay_rate(const CExpr& e, const Cell& c)
{
  if (!c.normalized()) fail(ErrorKind::NotPrepared, "decay_rate needs a normalized cell");
  if (e.terms.empty()) fail(ErrorKind::EmptyExpr, "decay of an empty sum");
  const int last = c.size() - 1;
  if (!c.vars[last].lower.is_zero()) fail(ErrorKind::NotPrepared, "last variable does not reach 0");
  for (const auto& t : e.terms)
    for (const auto& [a, k] : t.extras)
      if (a.kind == LogAtom::Kind::Var) fail(ErrorKind::NotPrepared, "shifted logarithm in a prepared term");

  DecayResult d;
  d.rbar = e.terms[0].exps[last];
  for (const auto& t : e.terms) d.rbar = std::min(d.rbar, t.exps[last]);
  if (d.rbar <= 0) fail(ErrorKind::NoDecay, "leading exponent " + to_string(d.rbar) + " is not positive");
  for (const auto& t : e.terms)
    if (t.exps[last] == d.rbar) d.lbar = std::max(d.lbar, t.logs[last]);
  d.epsilon = d.rbar / (2 * d.lbar + 2);
  const Rat E = d.rbar - d.epsilon * d.lbar;
  d.r = E / 2;
  d.delta = Rat(1, 2);
  for (const auto& t : e.terms) {
    if (t.logs[last] == 0) continue;
    const Rat kappa = (t.exps[last] - E) / t.logs[last];
    d.delta = std::min(d.delta, log_power_threshold(kappa));
  }
  d.h = subanalytic_bound_base(e, last);
  d.g_exponent = Rat(-1) / (E - d.r);
  return d;
}

}  // namespace cf
