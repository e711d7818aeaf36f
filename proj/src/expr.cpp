#include "cf/expr.hpp"

#include <algorithm>
#include <utility>

namespace cf {

ExpVec zero_exps(int n) { return ExpVec(static_cast<std::size_t>(n), Rat(0)); }

bool all_zero(const ExpVec& e)
{
  return std::all_of(e.begin(), e.end(), [](const Rat& q) { return q == 0; });
}

bool all_nonneg(const ExpVec& e)
{
  return std::all_of(e.begin(), e.end(), [](const Rat& q) { return q >= 0; });
}

ExpVec exp_add(const ExpVec& a, const ExpVec& b)
{
  if (a.size() != b.size()) fail(ErrorKind::Internal, "exponent vectors of different length");
  ExpVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

ExpVec exp_sub(const ExpVec& a, const ExpVec& b)
{
  if (a.size() != b.size()) fail(ErrorKind::Internal, "exponent vectors of different length");
  ExpVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

ExpVec exp_scale(const ExpVec& a, const Rat& k)
{
  ExpVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * k;
  return r;
}

std::vector<int> support(const ExpVec& e)
{
  std::vector<int> s;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != 0) s.push_back(static_cast<int>(i));
  return s;
}

std::optional<Rat> signed_pow(const Rat& q, const Rat& e)
{
  if (is_integer(e)) return exact_pow(q, e);
  auto r = exact_pow(rat_abs(q), e);
  return r;
}

// ---------------------------------------------------------------- units

namespace {

int compare_rat(const Rat& a, const Rat& b) { return cmp(a, b) < 0 ? -1 : (cmp(a, b) > 0 ? 1 : 0); }

int compare_exps(const ExpVec& a, const ExpVec& b)
{
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (int c = compare_rat(a[i], b[i])) return c;
  return 0;
}

Rat min_of(const Rat& a, const Rat& b) { return a < b ? a : b; }
Rat max_of(const Rat& a, const Rat& b) { return a < b ? b : a; }

}  // namespace

struct UnitBuilder {
  static PolyUnit build(Rat c, std::vector<UnitSummand> s)
  {
    PolyUnit u;
    u.c_ = std::move(c);
    u.s_ = std::move(s);
    return u;
  }
};

Rat PolyUnit::lower_bound() const
{
  Rat lb = c_;
  for (const auto& t : s_) lb += min_of(t.coeff * t.lo, t.coeff * t.hi);
  return lb;
}

Rat PolyUnit::upper_bound() const
{
  Rat ub = c_;
  for (const auto& t : s_) ub += max_of(t.coeff * t.lo, t.coeff * t.hi);
  return ub;
}

bool PolyUnit::depends_on(int pos) const
{
  for (const auto& t : s_)
    if (pos < static_cast<int>(t.exps.size()) && t.exps[pos] != 0) return true;
  return false;
}

int compare(const PolyUnit& a, const PolyUnit& b)
{
  if (int c = compare_rat(a.constant(), b.constant())) return c;
  const auto& x = a.summands();
  const auto& y = b.summands();
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (int c = compare_exps(x[i].exps, y[i].exps)) return c;
    if (int c = compare_rat(x[i].coeff, y[i].coeff)) return c;
  }
  return 0;
}

UnitStatus make_unit(Rat constant, std::vector<UnitSummand> summands, ScaledUnit& out)
{
  std::vector<UnitSummand> merged;
  std::sort(summands.begin(), summands.end(),
            [](const UnitSummand& a, const UnitSummand& b) { return compare_exps(a.exps, b.exps) < 0; });
  for (auto& s : summands) {
    if (all_zero(s.exps)) {
      constant += s.coeff;
      continue;
    }
    if (!merged.empty() && compare_exps(merged.back().exps, s.exps) == 0) {
      auto& m = merged.back();
      m.coeff += s.coeff;
      m.lo = max_of(m.lo, s.lo);
      m.hi = min_of(m.hi, s.hi);
    } else {
      merged.push_back(std::move(s));
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const UnitSummand& s) { return s.coeff == 0; }),
               merged.end());
  if (merged.empty() && constant == 0) return UnitStatus::Zero;

  PolyUnit u = UnitBuilder::build(constant, merged);
  Rat sgn = 1;
  if (u.lower_bound() > 0) {
    sgn = 1;
  } else if (u.upper_bound() < 0) {
    sgn = -1;
  } else {
    return UnitStatus::Uncertified;
  }
  Rat scale = constant != 0 ? Rat(rat_abs(constant)) : Rat(rat_abs(merged.front().coeff));
  scale *= sgn;
  for (auto& s : merged) s.coeff /= scale;
  out.scale = scale;
  out.unit = UnitBuilder::build(constant / scale, std::move(merged));
  return UnitStatus::Ok;
}

UnitStatus unit_mul(const PolyUnit& a, const PolyUnit& b, ScaledUnit& out)
{
  if (a.trivial() && a.constant() == 1) {
    out = {Rat(1), b};
    return UnitStatus::Ok;
  }
  if (b.trivial() && b.constant() == 1) {
    out = {Rat(1), a};
    return UnitStatus::Ok;
  }
  std::vector<UnitSummand> s;
  Rat c = a.constant() * b.constant();
  for (const auto& x : a.summands())
    if (b.constant() != 0) s.push_back({x.coeff * b.constant(), x.exps, x.lo, x.hi});
  for (const auto& y : b.summands())
    if (a.constant() != 0) s.push_back({y.coeff * a.constant(), y.exps, y.lo, y.hi});
  for (const auto& x : a.summands())
    for (const auto& y : b.summands()) s.push_back({x.coeff * y.coeff, exp_add(x.exps, y.exps), x.lo * y.lo, x.hi * y.hi});
  return make_unit(c, std::move(s), out);
}

UnitStatus unit_lincomb(const Rat& a, const PolyUnit& u, const Rat& b, const PolyUnit& v, ScaledUnit& out)
{
  std::vector<UnitSummand> s;
  for (const auto& x : u.summands()) s.push_back({a * x.coeff, x.exps, x.lo, x.hi});
  for (const auto& y : v.summands()) s.push_back({b * y.coeff, y.exps, y.lo, y.hi});
  return make_unit(a * u.constant() + b * v.constant(), std::move(s), out);
}

PolyUnit monomial_unit(const ExpVec& exps, const Rat& lo, const Rat& hi)
{
  if (all_zero(exps)) return PolyUnit();
  if (lo <= 0) fail(ErrorKind::UnitCertificateViolated, "monomial unit range must be bounded away from 0");
  return UnitBuilder::build(Rat(0), {UnitSummand{Rat(1), exps, lo, hi}});
}

UnitStatus unit_pow(const PolyUnit& u, const Rat& e, ScaledUnit& out)
{
  if (e == 0 || (u.trivial() && u.constant() == 1)) {
    out = {Rat(1), PolyUnit()};
    return UnitStatus::Ok;
  }
  if (u.pure_monomial()) {
    const auto& m = u.summands().front();
    auto lo = pow_enclosure(m.lo, e);
    auto hi = pow_enclosure(m.hi, e);
    Rat nlo = e > 0 ? lo.first : hi.first;
    Rat nhi = e > 0 ? hi.second : lo.second;
    out = {Rat(1), monomial_unit(exp_scale(m.exps, e), nlo, nhi)};
    return UnitStatus::Ok;
  }
  if (!is_integer(e) || e < 0) return UnitStatus::Uncertified;
  long k = to_long(e);
  ScaledUnit acc{Rat(1), PolyUnit()};
  for (long i = 0; i < k; ++i) {
    ScaledUnit next;
    auto st = unit_mul(acc.unit, u, next);
    if (st != UnitStatus::Ok) return st;
    acc = {acc.scale * next.scale, next.unit};
  }
  out = acc;
  return UnitStatus::Ok;
}

// ---------------------------------------------------------------- log atoms

LogAtom LogAtom::var(int pos, const Rat& center)
{
  LogAtom a;
  a.kind = Kind::Var;
  a.pos = pos;
  a.center = center;
  return a;
}

LogAtom LogAtom::constant(const mpz_class& p)
{
  LogAtom a;
  a.kind = Kind::Const;
  a.prime = p;
  return a;
}

LogAtom LogAtom::of_unit(const PolyUnit& u)
{
  LogAtom a;
  a.kind = Kind::Unit;
  a.unit = u;
  return a;
}

int compare(const LogAtom& a, const LogAtom& b)
{
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case LogAtom::Kind::Var:
      if (a.pos != b.pos) return a.pos < b.pos ? -1 : 1;
      return compare_rat(a.center, b.center);
    case LogAtom::Kind::Const:
      return a.prime < b.prime ? -1 : (b.prime < a.prime ? 1 : 0);
    case LogAtom::Kind::Unit:
      return compare(a.unit, b.unit);
  }
  return 0;
}

// ---------------------------------------------------------------- terms

Term make_term(int n, const Rat& coeff)
{
  Term t;
  t.coeff = coeff;
  t.exps = zero_exps(n);
  t.logs.assign(static_cast<std::size_t>(n), 0);
  return t;
}

int compare_signature(const Term& a, const Term& b)
{
  if (int c = compare_exps(a.exps, b.exps)) return c;
  if (a.logs != b.logs) return a.logs < b.logs ? -1 : 1;
  auto i = a.extras.begin();
  auto j = b.extras.begin();
  for (; i != a.extras.end() && j != b.extras.end(); ++i, ++j) {
    if (int c = compare(i->first, j->first)) return c;
    if (i->second != j->second) return i->second < j->second ? -1 : 1;
  }
  if (i != a.extras.end()) return 1;
  if (j != b.extras.end()) return -1;
  return 0;
}

CExpr cexpr_const(int n, const Rat& q)
{
  CExpr e{n, {}};
  if (q != 0) e.terms.push_back(make_term(n, q));
  return e;
}

CExpr cexpr_var(int n, int pos)
{
  Term t = make_term(n);
  t.exps.at(pos) = 1;
  return {n, {t}};
}

CExpr cexpr_monomial(int n, const Rat& q, const ExpVec& exps)
{
  if (q == 0) return {n, {}};
  Term t = make_term(n, q);
  t.exps = exps;
  return {n, {t}};
}

CExpr cexpr_logvar(int n, int pos)
{
  Term t = make_term(n);
  t.logs.at(pos) = 1;
  return {n, {t}};
}

CExpr cexpr_term(const Term& t) { return {t.nvars(), {t}}; }

CExpr cexpr_log_const(int n, const Rat& q)
{
  if (q == 0) fail(ErrorKind::DomainError, "log(0)");
  CExpr e{n, {}};
  for (const auto& [p, k] : factor_rat(q)) {
    Term t = make_term(n, Rat(k));
    t.extras[LogAtom::constant(p)] = 1;
    e.terms.push_back(t);
  }
  return e;
}

CExpr add(const CExpr& a, const CExpr& b)
{
  CExpr r{std::max(a.nvars, b.nvars), a.terms};
  r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
  return normalize(r);
}

CExpr neg(const CExpr& a) { return scale(a, Rat(-1)); }

CExpr sub(const CExpr& a, const CExpr& b) { return add(a, neg(b)); }

CExpr scale(const CExpr& a, const Rat& k)
{
  if (k == 0) return {a.nvars, {}};
  CExpr r = a;
  for (auto& t : r.terms) t.coeff *= k;
  return r;
}

namespace {

Term strip_unit(const Term& t)
{
  Term r = t;
  r.unit = PolyUnit();
  return r;
}

Term plain_product(const Term& a, const Term& b)
{
  Term r = a;
  r.coeff = a.coeff * b.coeff;
  r.exps = exp_add(a.exps, b.exps);
  for (std::size_t i = 0; i < r.logs.size(); ++i) r.logs[i] += b.logs[i];
  for (const auto& [atom, k] : b.extras) r.extras[atom] += k;
  r.unit = PolyUnit();
  return r;
}

}  // namespace

CExpr expand_unit(const Term& t)
{
  const int n = t.nvars();
  CExpr r{n, {}};
  Term base = strip_unit(t);
  if (t.unit.constant() != 0) {
    Term c = base;
    c.coeff *= t.unit.constant();
    r.terms.push_back(c);
  }
  for (const auto& s : t.unit.summands()) {
    Term m = base;
    m.coeff *= s.coeff;
    m.exps = exp_add(m.exps, s.exps);
    r.terms.push_back(m);
  }
  return r;
}

CExpr expand_units(const CExpr& e)
{
  CExpr r{e.nvars, {}};
  for (const auto& t : e.terms) {
    CExpr x = expand_unit(t);
    r.terms.insert(r.terms.end(), x.terms.begin(), x.terms.end());
  }
  return normalize(r);
}

CExpr mul_term(const Term& a, const Term& b)
{
  const int n = std::max(a.nvars(), b.nvars());
  Term p = plain_product(a, b);
  ScaledUnit su;
  if (unit_mul(a.unit, b.unit, su) == UnitStatus::Ok) {
    p.coeff *= su.scale;
    p.unit = su.unit;
    return {n, {p}};
  }
  CExpr r{n, {}};
  CExpr xa = expand_unit(a);
  CExpr xb = expand_unit(b);
  for (const auto& s : xa.terms)
    for (const auto& t : xb.terms) r.terms.push_back(plain_product(s, t));
  return r;
}

CExpr mul(const CExpr& a, const CExpr& b)
{
  CExpr r{std::max(a.nvars, b.nvars), {}};
  for (const auto& s : a.terms)
    for (const auto& t : b.terms) {
      CExpr p = mul_term(s, t);
      r.terms.insert(r.terms.end(), p.terms.begin(), p.terms.end());
    }
  return normalize(r);
}

CExpr pow(const CExpr& a, unsigned k)
{
  CExpr r = cexpr_const(a.nvars, Rat(1));
  CExpr base = a;
  while (k > 0) {
    if (k & 1u) r = mul(r, base);
    k >>= 1u;
    if (k > 0) base = mul(base, base);
  }
  return r;
}

// ---------------------------------------------------------------- normalize

namespace {

void canonicalize_term(Term& t)
{
  for (auto it = t.extras.begin(); it != t.extras.end();) {
    if (it->first.kind == LogAtom::Kind::Var && it->first.center == 0) {
      t.logs.at(it->first.pos) += it->second;
      it = t.extras.erase(it);
    } else if (it->first.kind == LogAtom::Kind::Unit && it->first.unit.trivial()) {
      // log of a positive constant unit: constant is 1 after canonical scaling
      if (it->first.unit.constant() == 1) {
        t.coeff = 0;
        return;
      }
      ++it;
    } else if (it->second == 0) {
      it = t.extras.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace

CExpr normalize(const CExpr& e)
{
  std::vector<Term> work;
  work.reserve(e.terms.size());
  for (auto t : e.terms) {
    if (t.coeff == 0) continue;
    canonicalize_term(t);
    if (t.coeff == 0) continue;
    if (t.unit.trivial() && t.unit.constant() != 1) {
      t.coeff *= t.unit.constant();
      t.unit = PolyUnit();
      if (t.coeff == 0) continue;
    }
    work.push_back(std::move(t));
  }

  for (;;) {
    std::stable_sort(work.begin(), work.end(),
                     [](const Term& a, const Term& b) { return compare_signature(a, b) < 0; });
    std::vector<Term> out;
    bool restart = false;
    std::size_t i = 0;
    while (i < work.size()) {
      std::size_t j = i + 1;
      while (j < work.size() && compare_signature(work[i], work[j]) == 0) ++j;
      Term acc = work[i];
      bool zero = false;
      bool failed = false;
      for (std::size_t k = i + 1; k < j; ++k) {
        if (zero) {
          acc = work[k];
          zero = false;
          continue;
        }
        ScaledUnit su;
        auto st = unit_lincomb(acc.coeff, acc.unit, work[k].coeff, work[k].unit, su);
        if (st == UnitStatus::Zero) {
          zero = true;
        } else if (st == UnitStatus::Uncertified) {
          failed = true;
          break;
        } else {
          acc.coeff = su.scale;
          acc.unit = su.unit;
        }
      }
      if (failed) {
        std::vector<Term> next(out);
        for (std::size_t k = i; k < j; ++k) {
          CExpr x = expand_unit(work[k]);
          next.insert(next.end(), x.terms.begin(), x.terms.end());
        }
        next.insert(next.end(), work.begin() + static_cast<long>(j), work.end());
        work = std::move(next);
        restart = true;
        break;
      }
      if (!zero && acc.coeff != 0) out.push_back(acc);
      i = j;
    }
    if (!restart) return {e.nvars, std::move(out)};
  }
}

bool is_normalized(const CExpr& e)
{
  for (std::size_t i = 0; i + 1 < e.terms.size(); ++i)
    if (compare_signature(e.terms[i], e.terms[i + 1]) >= 0) return false;
  for (const auto& t : e.terms)
    if (t.coeff == 0) return false;
  return true;
}

bool has_log_units(const CExpr& e)
{
  for (const auto& t : e.terms)
    for (const auto& [a, k] : t.extras)
      if (a.kind == LogAtom::Kind::Unit) return true;
  return false;
}

bool log_free(const CExpr& e)
{
  for (const auto& t : e.terms) {
    if (!t.extras.empty()) return false;
    for (int l : t.logs)
      if (l != 0) return false;
  }
  return true;
}

bool is_zero(const CExpr& e)
{
  std::vector<const Term*> sorted;
  for (const auto& t : e.terms) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(), [](const Term* a, const Term* b) { return compare_signature(*a, *b) < 0; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (compare_signature(*sorted[i], *sorted[i + 1]) == 0)
      fail(ErrorKind::NotNormalized, "duplicate term signatures; normalize first");
  if (has_log_units(e)) fail(ErrorKind::UnsupportedZeroTest, "zero test with log-of-unit factors");
  return expand_units(e).terms.empty();
}

bool depends_on(const Term& t, int pos)
{
  if (t.exps.at(pos) != 0 || t.logs.at(pos) != 0) return true;
  if (t.unit.depends_on(pos)) return true;
  for (const auto& [a, k] : t.extras) {
    if (a.kind == LogAtom::Kind::Var && a.pos == pos) return true;
    if (a.kind == LogAtom::Kind::Unit && a.unit.depends_on(pos)) return true;
  }
  return false;
}

bool depends_on(const CExpr& e, int pos)
{
  for (const auto& t : e.terms)
    if (depends_on(t, pos)) return true;
  return false;
}

// ---------------------------------------------------------------- derivative

CExpr differentiate(const Term& t, int pos)
{
  const int n = t.nvars();
  CExpr r{n, {}};
  for (const auto& [a, k] : t.extras) {
    if (a.kind == LogAtom::Kind::Var && a.pos == pos)
      fail(ErrorKind::FragmentEscape, "derivative of a shifted log leaves the fragment");
    if (a.kind == LogAtom::Kind::Unit && a.unit.depends_on(pos))
      fail(ErrorKind::FragmentEscape, "derivative of log of a unit leaves the fragment");
  }
  Term bare = strip_unit(t);
  // d/dy of the monomial factor
  if (t.exps[pos] != 0) {
    Term d = bare;
    d.coeff *= t.exps[pos];
    d.exps[pos] -= 1;
    r.terms.push_back(d);
  }
  // d/dy of (log y)^l
  if (t.logs[pos] != 0) {
    Term d = bare;
    d.coeff *= t.logs[pos];
    d.logs[pos] -= 1;
    d.exps[pos] -= 1;
    r.terms.push_back(d);
  }
  // the unit is carried along on those two terms
  CExpr with_unit{n, {}};
  for (auto& d : r.terms) {
    Term x = d;
    x.unit = t.unit;
    with_unit.terms.push_back(x);
  }
  r = with_unit;
  // bare * d/dy(unit)
  for (const auto& s : t.unit.summands()) {
    if (s.exps[pos] == 0) continue;
    Term d = bare;
    d.coeff *= s.coeff * s.exps[pos];
    d.exps = exp_add(d.exps, s.exps);
    d.exps[pos] -= 1;
    r.terms.push_back(d);
  }
  return normalize(r);
}

CExpr differentiate(const CExpr& e, int pos)
{
  CExpr r{e.nvars, {}};
  for (const auto& t : e.terms) {
    CExpr d = differentiate(t, pos);
    r.terms.insert(r.terms.end(), d.terms.begin(), d.terms.end());
  }
  return normalize(r);
}

// ---------------------------------------------------------------- resize

PolyUnit resize(const PolyUnit& u, int n)
{
  std::vector<UnitSummand> s = u.summands();
  for (auto& x : s) {
    for (std::size_t i = static_cast<std::size_t>(n); i < x.exps.size(); ++i)
      if (x.exps[i] != 0) fail(ErrorKind::Internal, "resize drops a used variable");
    x.exps.resize(static_cast<std::size_t>(n), Rat(0));
  }
  return UnitBuilder::build(u.constant(), std::move(s));
}

LogAtom resize(const LogAtom& a, int n)
{
  if (a.kind == LogAtom::Kind::Var && a.pos >= n) fail(ErrorKind::Internal, "resize drops a used variable");
  if (a.kind != LogAtom::Kind::Unit) return a;
  return LogAtom::of_unit(resize(a.unit, n));
}

Term resize(const Term& t, int n)
{
  Term r = t;
  for (std::size_t i = static_cast<std::size_t>(n); i < t.exps.size(); ++i)
    if (t.exps[i] != 0 || t.logs[i] != 0) fail(ErrorKind::Internal, "resize drops a used variable");
  r.exps.resize(static_cast<std::size_t>(n), Rat(0));
  r.logs.resize(static_cast<std::size_t>(n), 0);
  r.extras.clear();
  for (const auto& [a, k] : t.extras) r.extras[resize(a, n)] = k;
  r.unit = resize(t.unit, n);
  return r;
}

CExpr resize(const CExpr& e, int n)
{
  CExpr r{n, {}};
  for (const auto& t : e.terms) r.terms.push_back(resize(t, n));
  return r;
}

}  // namespace cf
