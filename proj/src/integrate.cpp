#include "cf/integrate.hpp"

#include "cf/frontend.hpp"

#include <algorithm>

namespace cf {

namespace {

/// coeff * w^m * (log w)^k, keyed by (m, k).
using PowLog = std::map<std::pair<Rat, int>, Rat>;

Rat falling(int s, int k)
{
  Rat r(1);
  for (int i = 0; i < k; ++i) r *= s - i;
  return r;
}

/// Closed form of the antiderivative of w^r (log w)^s.
PowLog antideriv_closed(const Rat& r, int s)
{
  PowLog out;
  if (r == -1) {
    out[{Rat(0), s + 1}] = Rat(1, s + 1);
    return out;
  }
  const Rat r1 = r + 1;
  for (int k = 0; k <= s; ++k) {
    Rat c = falling(s, k) / pow_int(r1, k + 1);
    if (k % 2 == 1) c = -c;
    out[{r1, s - k}] += c;
  }
  return out;
}

/// Integration by parts, one log power at a time.
PowLog antideriv_recursive(const Rat& r, int s)
{
  PowLog out;
  if (r == -1) {
    out[{Rat(0), s + 1}] = Rat(1, s + 1);
    return out;
  }
  const Rat r1 = r + 1;
  out[{r1, s}] += 1 / r1;
  if (s > 0) {
    for (const auto& [key, c] : antideriv_recursive(r, s - 1)) out[key] += -Rat(s) / r1 * c;
  }
  return out;
}

CExpr powlog_to_cexpr(const PowLog& pl)
{
  CExpr e{1, {}};
  for (const auto& [key, c] : pl) {
    if (c == 0) continue;
    Term t = make_term(1, c);
    t.exps[0] = key.first;
    t.logs[0] = key.second;
    e.terms.push_back(t);
  }
  return normalize(e);
}

/// w^m at a bound, over the base.
CExpr bound_power(const BoundSpec& b, int n, const Rat& m)
{
  Term t = make_term(n, 1);
  const auto q = exact_pow(b.coeff, m);
  if (!q) fail(ErrorKind::FragmentEscape, "irrational power of a bound coefficient");
  t.coeff = *q;
  t.exps = exp_scale(b.exps, m);
  return cexpr_term(t);
}

/// log w at a bound, over the base.
CExpr bound_log(const BoundSpec& b, int n)
{
  CExpr e = cexpr_log_const(n, b.coeff);
  for (int j = 0; j < n; ++j) {
    if (b.exps[j] == 0) continue;
    e = add(e, scale(cexpr_logvar(n, j), b.exps[j]));
  }
  return e;
}

/// sum over the antiderivative, evaluated at a nonzero bound.
CExpr eval_at(const std::map<std::pair<Rat, int>, CExpr>& anti, const BoundSpec& b, int n)
{
  CExpr out{n, {}};
  if (anti.empty()) return out;
  const CExpr L = bound_log(b, n);
  std::map<int, CExpr> lpow;
  for (const auto& [key, c] : anti) {
    const auto& [m, k] = key;
    auto it = lpow.find(k);
    if (it == lpow.end()) it = lpow.emplace(k, pow(L, static_cast<unsigned>(k))).first;
    out = add(out, mul(c, mul(bound_power(b, n, m), it->second)));
  }
  return normalize(out);
}

}  // namespace

CExpr antiderivative_pow_log(const Rat& r, int s, AntiderivativeMethod method)
{
  if (s < 0) fail(ErrorKind::DomainError, "negative log power");
  return powlog_to_cexpr(method == AntiderivativeMethod::ClosedForm ? antideriv_closed(r, s)
                                                                    : antideriv_recursive(r, s));
}

BoundSpec bound_spec(const Bound& b, int base_n)
{
  BoundSpec out;
  if (!b.finite()) fail(ErrorKind::NotNormalized, "infinite bound in a normalized cell");
  if (b.is_zero()) {
    out.zero = true;
    out.exps = zero_exps(base_n);
    return out;
  }
  const Term& t = b.term();
  for (int j = base_n; j < t.nvars(); ++j)
    if (t.exps[j] != 0) fail(ErrorKind::NotNormalized, "bound depends on its own variable");
  out.coeff = t.coeff;
  out.exps = t.exps;
  out.exps.resize(static_cast<std::size_t>(base_n), Rat(0));
  // Unit bounds would need opaque atoms in the antiderivative; the numeric
  // oracle handles those cells.
  if (!t.unit.trivial()) fail(ErrorKind::BoundUnitUnsupported, "bound carries a nontrivial unit");
  out.coeff *= t.unit.constant();
  if (out.coeff <= 0) fail(ErrorKind::NotNormalized, "nonpositive bound");
  return out;
}

BoundSpec bound_root(const BoundSpec& b, long p)
{
  if (b.zero || p == 1) return b;
  BoundSpec out = b;
  const auto q = exact_pow(b.coeff, Rat(1, p));
  if (!q) fail(ErrorKind::FragmentEscape, "bound coefficient " + to_string(b.coeff) + " has no rational root of order " + std::to_string(p));
  out.coeff = *q;
  out.exps = exp_scale(b.exps, Rat(1, p));
  return out;
}

CExpr integrate_sform(const SForm& sf, const BoundSpec& a, const BoundSpec& b)
{
  const int n = sf.nvars;
  std::map<std::pair<Rat, int>, CExpr> anti;
  auto accumulate = [&](const Rat& r, const CExpr& coeff) {
    for (const auto& [key, c] : antideriv_closed(r, sf.s)) {
      auto it = anti.find(key);
      if (it == anti.end()) it = anti.emplace(key, CExpr{n, {}}).first;
      it->second = add(it->second, scale(coeff, c));
    }
  };
  for (const auto& [i, c] : sf.laurent) accumulate(Rat(-i), c);
  for (const auto& [k, c] : sf.analytic) accumulate(Rat(k), c);

  // A lower end at 0 is an improper integral: only the analytic part has a
  // limit there, and that limit is 0. A positive end is plain evaluation.
  CExpr lower{n, {}};
  if (a.zero) {
    for (const auto& [i, c] : sf.laurent)
      if (!is_zero(c)) fail(ErrorKind::NotIntegrable, "w^-" + std::to_string(i) + " at a lower bound 0");
  } else {
    lower = eval_at(anti, a, n);
  }
  if (b.zero) fail(ErrorKind::NotNormalized, "upper bound 0");
  return normalize(sub(eval_at(anti, b, n), lower));
}


// ---------------------------------------------------------------- splitting

SplitSeries split(const Poly3& F)
{
  SplitSeries s;
  for (const auto& [key, c] : F) {
    if (c == 0) continue;
    const auto [a, i, j] = key;
    if (a < 0 || i < 0 || j < 0) fail(ErrorKind::DomainError, "split needs a polynomial");
    if (i - j >= 0)
      s.geq0[{a, j, i - j}] += c;
    else if (i - j == -1)
      s.minus1[{a, i, 0}] += c;
    else
      s.leq_minus2[{a, i, j - i - 2}] += c;
  }
  return s;
}

namespace {

void add_to(Laurent3& out, const std::array<int, 3>& key, const Rat& c)
{
  Rat& v = out[key];
  v += c;
  if (v == 0) out.erase(key);
}

}  // namespace

Laurent3 substitute_ratio(const Poly3& F)
{
  Laurent3 out;
  for (const auto& [key, c] : F) {
    const auto [a, i, j] = key;
    add_to(out, {a, j, i - j}, c);
  }
  return out;
}

Laurent3 reconstruct(const SplitSeries& s)
{
  Laurent3 out;
  for (const auto& [key, c] : s.leq_minus2) {
    const auto [a, d, z] = key;
    add_to(out, {a, d + z + 2, -(z + 2)}, c);
  }
  for (const auto& [key, c] : s.minus1) {
    const auto [a, d, z] = key;
    add_to(out, {a, d + 1, -1 + z}, c);
  }
  for (const auto& [key, c] : s.geq0) add_to(out, key, c);
  return out;
}

// ---------------------------------------------------------------- changes of variables

namespace {

/// t with the factors in `pos` removed.
Term strip_var(const Term& t, int pos)
{
  Term b = t;
  b.exps[pos] = 0;
  b.logs[pos] = 0;
  return b;
}

void check_atoms(const Term& t, int pos)
{
  for (const auto& [a, k] : t.extras) {
    if (a.kind == LogAtom::Kind::Var && a.pos == pos)
      fail(ErrorKind::FragmentEscape, "shifted logarithm of the substituted variable");
    if (a.kind == LogAtom::Kind::Unit && a.unit.depends_on(pos))
      fail(ErrorKind::FragmentEscape, "logarithm of a unit in the substituted variable");
  }
}

/// |a|^r for a single term free of logs.
CExpr term_pow(const Term& a, const Rat& r)
{
  if (!a.extras.empty() || std::any_of(a.logs.begin(), a.logs.end(), [](int l) { return l != 0; }))
    fail(ErrorKind::FragmentEscape, "power of a logarithmic factor");
  const auto q = signed_pow(a.coeff, r);
  if (!q) fail(ErrorKind::FragmentEscape, "irrational power of " + to_string(a.coeff));
  Term t = make_term(a.nvars(), *q);
  t.exps = exp_scale(a.exps, r);
  if (!a.unit.trivial()) {
    ScaledUnit su;
    if (unit_pow(a.unit, r, su) != UnitStatus::Ok) fail(ErrorKind::FragmentEscape, "power of a unit");
    t.coeff *= su.scale;
    t.unit = su.unit;
  } else {
    const auto u = signed_pow(a.unit.constant(), r);
    if (!u) fail(ErrorKind::FragmentEscape, "irrational power of a unit constant");
    t.coeff *= *u;
  }
  return cexpr_term(t);
}

/// log|a| for a single term free of logs.
CExpr term_log(const Term& a)
{
  const int n = a.nvars();
  CExpr e = cexpr_log_const(n, a.coeff * a.unit.constant());
  for (int j = 0; j < n; ++j)
    if (a.exps[j] != 0) e = add(e, scale(cexpr_logvar(n, j), a.exps[j]));
  if (!a.unit.trivial()) {
    if (a.unit.lower_bound() <= 0) fail(ErrorKind::FragmentEscape, "logarithm of a unit that is not positive");
    Term t = make_term(n, 1);
    t.extras[LogAtom::of_unit(a.unit)] = 1;
    e = add(e, cexpr_term(t));
  }
  return e;
}

const Term& single_term(const CExpr& e, const char* what)
{
  if (e.terms.size() != 1) fail(ErrorKind::DomainError, std::string(what) + " must be a single term");
  return e.terms.front();
}

CExpr power_subst(const Term& t, long p, int pos)
{
  if (p < 1) fail(ErrorKind::DomainError, "power substitution needs p >= 1");
  check_atoms(t, pos);
  const int s = t.logs[pos];
  Term out = t;
  out.coeff *= pow_int(Rat(p), s + 1);
  out.exps[pos] = t.exps[pos] * p + p - 1;
  if (!t.unit.trivial() && t.unit.depends_on(pos)) {
    std::vector<UnitSummand> ss = t.unit.summands();
    for (auto& u : ss) u.exps[pos] *= p;
    ScaledUnit su;
    if (make_unit(t.unit.constant(), ss, su) != UnitStatus::Ok)
      fail(ErrorKind::Internal, "unit lost its certificate under y = w^p");
    out.coeff *= su.scale;
    out.unit = su.unit;
  }
  return cexpr_term(out);
}

/// y = a w^sigma with a > 0 free of `pos`, sigma = +-1. Returns the pulled
/// back term without the Jacobian.
CExpr scaled_pullback(const Term& t, const Term& a, int sigma, int pos)
{
  const int n = t.nvars();
  if (t.unit.depends_on(pos)) fail(ErrorKind::FragmentEscape, "unit in the substituted variable");
  const Rat r = t.exps[pos];
  const int s = t.logs[pos];
  CExpr w = cexpr_monomial(n, Rat(1), [&] {
    ExpVec e = zero_exps(n);
    e[pos] = r * sigma;
    return e;
  }());
  CExpr out = mul(cexpr_term(strip_var(t, pos)), mul(term_pow(a, r), w));
  if (s > 0) {
    const CExpr L = add(term_log(a), scale(cexpr_logvar(n, pos), Rat(sigma)));
    out = mul(out, pow(L, static_cast<unsigned>(s)));
  }
  return out;
}

CExpr affine_subst(const Term& t, const AffineSubst& rule, int pos)
{
  const int n = t.nvars();
  check_atoms(t, pos);
  const Term& a = single_term(rule.scale, "affine scale");
  if (depends_on(a, pos) || depends_on(rule.shift, pos))
    fail(ErrorKind::DomainError, "affine map must not involve the substituted variable");
  if (a.coeff <= 0) fail(ErrorKind::DomainError, "affine scale must be positive");
  const CExpr jac = rule.scale;
  if (is_zero(rule.shift)) return mul(scaled_pullback(t, a, 1, pos), jac);

  const Rat r = t.exps[pos];
  if (!is_integer(r) || r < 0 || t.logs[pos] != 0 || t.unit.depends_on(pos))
    fail(ErrorKind::FragmentEscape, "shifted substitution of a non-polynomial factor");
  const CExpr y = add(mul(rule.scale, cexpr_var(n, pos)), rule.shift);
  return mul(mul(cexpr_term(strip_var(t, pos)), pow(y, static_cast<unsigned>(to_long(r)))), jac);
}

CExpr reciprocal_subst(const Term& t, const ReciprocalSubst& rule, int pos)
{
  const int n = t.nvars();
  check_atoms(t, pos);
  const Term& d = single_term(rule.d, "reciprocal numerator");
  if (depends_on(d, pos)) fail(ErrorKind::DomainError, "reciprocal numerator must not involve the variable");
  if (d.coeff <= 0) fail(ErrorKind::DomainError, "reciprocal numerator must be positive");
  ExpVec e = zero_exps(n);
  e[pos] = -2;
  const CExpr jac = mul(rule.d, cexpr_monomial(n, Rat(1), e));
  return mul(scaled_pullback(t, d, -1, pos), jac);
}

}  // namespace

CExpr change_of_variables(const Term& t, const Substitution& rule, int pos)
{
  if (pos < 0 || pos >= t.nvars()) fail(ErrorKind::DomainError, "substitution position out of range");
  CExpr out;
  if (const auto* p = std::get_if<PowerSubst>(&rule))
    out = power_subst(t, p->p, pos);
  else if (const auto* a = std::get_if<AffineSubst>(&rule))
    out = affine_subst(t, *a, pos);
  else
    out = reciprocal_subst(t, std::get<ReciprocalSubst>(rule), pos);
  return normalize(out);
}

CExpr change_of_variables(const CExpr& e, const Substitution& rule, int pos)
{
  CExpr out{e.nvars, {}};
  for (const Term& t : e.terms) out = add(out, change_of_variables(t, rule, pos));
  return normalize(out);
}

// ---------------------------------------------------------------- drivers

CExpr integrate_last(const CExpr& e, const Cell& c)
{
  if (!c.normalized()) fail(ErrorKind::NotNormalized, "integration needs a normalized cell");
  const int n = c.size();
  if (n == 0) fail(ErrorKind::NotNormalized, "empty cell");
  if (e.nvars != n) fail(ErrorKind::NotNormalized, "expression and cell sizes differ");
  const int last = n - 1;

  CExpr flat{n, {}};
  for (const Term& t : e.terms) {
    for (const auto& [a, k] : t.extras) {
      if (a.kind == LogAtom::Kind::Var && a.pos == last)
        fail(ErrorKind::FragmentEscape, "shifted logarithm of the integration variable");
      if (a.kind == LogAtom::Kind::Unit && a.unit.depends_on(last))
        fail(ErrorKind::FragmentEscape, "logarithm of a unit in the integration variable");
    }
    if (t.unit.depends_on(last))
      flat = add(flat, expand_unit(t));
    else
      flat.terms.push_back(t);
  }
  flat = normalize(flat);

  std::vector<Rat> exps;
  for (const Term& t : flat.terms) exps.push_back(t.exps[last]);
  const long p = exps.empty() ? 1 : lcm_of_denominators(exps).get_si();

  std::map<int, SForm> forms;
  for (const Term& t : flat.terms) {
    const int s = t.logs[last];
    SForm& sf = forms[s];
    sf.nvars = last;
    sf.s = s;
    Term base = strip_var(t, last);
    base.coeff *= pow_int(Rat(p), s + 1);
    const CExpr coeff = cexpr_term(resize(base, last));
    const Rat ex = t.exps[last] * p + p - 1;
    const long k = to_long(ex);
    auto& slot = k >= 0 ? sf.analytic[static_cast<int>(k)] : sf.laurent[static_cast<int>(-k)];
    slot = add(slot.nvars == last ? slot : CExpr{last, {}}, coeff);
  }

  const BoundSpec a = bound_root(bound_spec(c.vars[last].lower, last), p);
  const BoundSpec b = bound_root(bound_spec(c.vars[last].upper, last), p);
  CExpr out{last, {}};
  for (const auto& [s, sf] : forms) out = add(out, integrate_sform(sf, a, b));
  return normalize(out);
}

namespace {

bool identity_on_base(const NormalizedCell& nc, int base)
{
  const int d = nc.cell.size();
  for (int j = 0; j < base; ++j) {
    if (nc.new_index[j] != j) return false;
    if (!is_zero(sub(nc.G[j], cexpr_var(d, j)))) return false;
  }
  return true;
}

}  // namespace

FubiniResult integrate_fubini(const std::vector<PreparedPiece>& pieces, int m)
{
  FubiniResult res;
  if (pieces.empty()) fail(ErrorKind::EmptyExpr, "no pieces to integrate");
  const int N = pieces.front().nc.source.size();
  if (m < 1 || m > N) fail(ErrorKind::DomainError, "cannot integrate " + std::to_string(m) + " of " + std::to_string(N) + " variables");
  const int base = N - m;

  for (std::size_t idx = 0; idx < pieces.size(); ++idx) {
    const PreparedPiece& pp = pieces[idx];
    PieceIntegral pi;
    pi.source = pp.nc.source;
    pi.nc = pp.nc;
    const int d = pp.nc.cell.size();
    bool thin = false;
    for (int j = base; j < N; ++j) thin = thin || !pp.nc.source.vars[j].fat;
    if (thin) {
      pi.measure_zero = true;
      int fat_base = 0;
      for (int j = 0; j < base; ++j) fat_base += pp.nc.source.vars[j].fat ? 1 : 0;
      pi.value = CExpr{fat_base, {}};
      res.assumptions.push_back("piece " + std::to_string(idx + 1) + " is thin in an integrated variable and contributes 0");
      res.pieces.push_back(std::move(pi));
      continue;
    }
    CExpr f = mul(pp.expr, pp.nc.jacobian);
    for (int i = 0; i < m; ++i) {
      const Cell c = pp.nc.cell.prefix(d - i);
      f = integrate_last(f, c);
    }
    pi.value = f;
    pi.integrated = m;
    res.pieces.push_back(std::move(pi));
  }

  // Regions need the source coordinates on the base: either nothing is
  // left, or every piece leaves the base variables untouched.
  bool shared = true;
  for (const auto& pi : res.pieces)
    if (!pi.measure_zero && base > 0 && !identity_on_base(pi.nc, base)) shared = false;
  if (shared) {
    std::map<std::string, std::size_t> index;
    for (const auto& pi : res.pieces) {
      if (pi.measure_zero) continue;
      Cell b = pi.nc.cell.prefix(base);
      const std::string key = to_string(b);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, res.regions.size()).first;
        res.regions.push_back({std::move(b), CExpr{base, {}}});
      }
      BaseRegion& r = res.regions[it->second];
      r.value = normalize(add(r.value, pi.value));
    }
    if (res.regions.size() <= 1) res.total = res.regions.empty() ? CExpr{base, {}} : res.regions.front().value;
    const auto names = pieces.front().nc.source.names();
    res.names.assign(names.begin(), names.begin() + base);
  }
  return res;
}

FubiniResult integrate_fubini(const SourceForm& s, int m)
{
  return integrate_fubini(prepare(s), m);
}

}  // namespace cf
