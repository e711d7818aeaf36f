#include "cf/cells.hpp"

#include <algorithm>

namespace cf {

// ---------------------------------------------------------------- bounds

Bound Bound::zero(int n) { return Bound{Kind::Finite, CExpr{n, {}}}; }

Bound Bound::constant(int n, const Rat& q) { return Bound{Kind::Finite, cexpr_const(n, q)}; }

Bound Bound::monomial(int n, const Rat& q, const ExpVec& exps, const PolyUnit& unit)
{
  Term t = make_term(n, q);
  t.exps = exps;
  t.exps.resize(static_cast<std::size_t>(n), Rat(0));
  t.unit = unit;
  return Bound{Kind::Finite, CExpr{n, {t}}};
}

Bound Bound::pos_inf() { return Bound{Kind::PosInf, {}}; }
Bound Bound::neg_inf() { return Bound{Kind::NegInf, {}}; }

bool Bound::is_monomial() const
{
  if (!finite() || value.terms.size() != 1) return false;
  const Term& t = value.terms.front();
  return t.extras.empty() && std::all_of(t.logs.begin(), t.logs.end(), [](int l) { return l == 0; });
}

const Term& Bound::term() const
{
  if (!is_monomial()) fail(ErrorKind::NotPrepared, "bound is not a monomial times a unit");
  return value.terms.front();
}

std::optional<Rat> Bound::as_constant() const
{
  if (!finite()) return std::nullopt;
  if (value.terms.empty()) return Rat(0);
  if (value.terms.size() != 1) return std::nullopt;
  const Term& t = value.terms.front();
  if (!all_zero(t.exps) || !t.extras.empty() || !t.unit.trivial()) return std::nullopt;
  for (int l : t.logs)
    if (l != 0) return std::nullopt;
  return t.coeff;
}

// ---------------------------------------------------------------- cells

int Cell::dim() const
{
  return static_cast<int>(std::count_if(vars.begin(), vars.end(), [](const VarSpec& v) { return v.fat; }));
}

std::vector<int> Cell::fat_indices() const
{
  std::vector<int> r;
  for (int i = 0; i < size(); ++i)
    if (vars[i].fat) r.push_back(i);
  return r;
}

std::vector<std::string> Cell::names() const
{
  std::vector<std::string> r;
  for (const auto& v : vars) r.push_back(v.name);
  return r;
}

Cell Cell::prefix(int k) const
{
  Cell c;
  for (int i = 0; i < k; ++i) {
    VarSpec v = vars.at(i);
    if (v.lower.finite()) v.lower.value = resize(v.lower.value, k);
    if (v.upper.finite()) v.upper.value = resize(v.upper.value, k);
    c.vars.push_back(v);
  }
  return c;
}

bool Cell::normalized() const
{
  for (const auto& v : vars) {
    if (!v.fat || v.center != 0 || v.eps != 1 || v.zeta != 1) return false;
    if (!(v.lower.is_zero() || v.lower.is_monomial())) return false;
    if (!v.upper.is_monomial()) return false;
  }
  return true;
}

// ---------------------------------------------------------------- ranges

namespace {

int highest_nonzero(const ExpVec& e)
{
  for (int k = static_cast<int>(e.size()) - 1; k >= 0; --k)
    if (e[k] != 0) return k;
  return -1;
}

ExpVec padded(const ExpVec& e, std::size_t n)
{
  ExpVec r = e;
  r.resize(n, Rat(0));
  return r;
}

const Term& bound_term_at(const Cell& c, int k, bool upper)
{
  const VarSpec& v = c.vars.at(k);
  if (!v.fat) fail(ErrorKind::NotPrepared, "monomial range needs a normalized cell");
  return (upper ? v.upper : v.lower).term();
}

Rat mono_lower(const Cell& c, const ExpVec& e)
{
  const int k = highest_nonzero(e);
  if (k < 0) return Rat(1);
  if (k >= c.size()) fail(ErrorKind::Internal, "monomial references a variable outside the cell");
  const Rat g = e[k];
  ExpVec rest = e;
  rest[k] = 0;
  const VarSpec& v = c.vars[k];
  if (g > 0 && v.lower.is_zero()) return Rat(0);
  const Term& t = bound_term_at(c, k, g < 0);
  if (t.coeff <= 0) fail(ErrorKind::NotPrepared, "non-positive bound in a normalized cell");
  Rat qg = pow_enclosure(t.coeff, g).first;
  Rat ug = g > 0 ? pow_enclosure(t.unit.lower_bound(), g).first : pow_enclosure(t.unit.upper_bound(), g).first;
  return qg * ug * mono_lower(c, exp_add(rest, exp_scale(padded(t.exps, e.size()), g)));
}

std::optional<Rat> mono_upper(const Cell& c, const ExpVec& e)
{
  const int k = highest_nonzero(e);
  if (k < 0) return Rat(1);
  if (k >= c.size()) fail(ErrorKind::Internal, "monomial references a variable outside the cell");
  const Rat g = e[k];
  ExpVec rest = e;
  rest[k] = 0;
  const VarSpec& v = c.vars[k];
  if (g < 0 && v.lower.is_zero()) return std::nullopt;
  const Term& t = bound_term_at(c, k, g > 0);
  if (t.coeff <= 0) fail(ErrorKind::NotPrepared, "non-positive bound in a normalized cell");
  Rat qg = pow_enclosure(t.coeff, g).second;
  Rat ug = g > 0 ? pow_enclosure(t.unit.upper_bound(), g).second : pow_enclosure(t.unit.lower_bound(), g).second;
  auto r = mono_upper(c, exp_add(rest, exp_scale(padded(t.exps, e.size()), g)));
  if (!r) return std::nullopt;
  return qg * ug * *r;
}

}  // namespace

std::optional<std::pair<Rat, Rat>> monomial_range(const Cell& c, const ExpVec& exps)
{
  auto hi = mono_upper(c, exps);
  if (!hi) return std::nullopt;
  return std::make_pair(mono_lower(c, exps), *hi);
}

std::optional<ScaledUnit> certify_unit(const CExpr& e, const Cell& c)
{
  if (!log_free(e)) return std::nullopt;
  CExpr x = expand_units(e);
  Rat constant = 0;
  std::vector<UnitSummand> s;
  for (const auto& t : x.terms) {
    if (all_zero(t.exps)) {
      constant += t.coeff;
      continue;
    }
    auto r = monomial_range(c, t.exps);
    if (!r) return std::nullopt;
    s.push_back({t.coeff, t.exps, r->first, r->second});
  }
  ScaledUnit su;
  if (make_unit(constant, std::move(s), su) != UnitStatus::Ok) return std::nullopt;
  return su;
}

std::optional<Factored> factor_mono_unit(const CExpr& e, const Cell& c)
{
  if (e.terms.empty() || !log_free(e)) return std::nullopt;
  if (e.terms.size() == 1) {
    const Term& t = e.terms.front();
    return Factored{t.coeff, t.exps, t.unit};
  }
  CExpr x = expand_units(e);
  if (x.terms.empty()) return std::nullopt;
  if (x.terms.size() == 1) return Factored{x.terms[0].coeff, x.terms[0].exps, PolyUnit()};

  std::optional<Factored> best;
  Rat best_score = -1;
  for (std::size_t l = 0; l < x.terms.size(); ++l) {
    const Term& lead = x.terms[l];
    std::vector<UnitSummand> s;
    bool ok = true;
    for (std::size_t k = 0; k < x.terms.size() && ok; ++k) {
      if (k == l) continue;
      ExpVec ratio = exp_sub(x.terms[k].exps, lead.exps);
      auto r = monomial_range(c, ratio);
      if (!r) {
        ok = false;
        break;
      }
      s.push_back({x.terms[k].coeff / lead.coeff, ratio, r->first, r->second});
    }
    if (!ok) continue;
    ScaledUnit su;
    if (make_unit(Rat(1), std::move(s), su) != UnitStatus::Ok) continue;
    Rat score = su.unit.lower_bound() / su.unit.upper_bound();
    if (!best || score > best_score) {
      best = Factored{lead.coeff * su.scale, lead.exps, su.unit};
      best_score = score;
    }
  }
  return best;
}

ExtRange value_range(const Factored& f, const Cell& c)
{
  const Rat mlo = mono_lower(c, f.exps);
  const auto mhi = mono_upper(c, f.exps);
  const Rat ulo = f.unit.lower_bound();
  const Rat uhi = f.unit.upper_bound();
  ExtRange r;
  if (f.coeff > 0) {
    r.lo = f.coeff * mlo * ulo;
    if (mhi) r.hi = f.coeff * *mhi * uhi;
  } else {
    r.hi = f.coeff * mlo * ulo;
    if (mhi) r.lo = f.coeff * *mhi * uhi;
  }
  return r;
}

// ---------------------------------------------------------------- composition

CExpr unit_as_cexpr(const PolyUnit& u, int n)
{
  CExpr r = cexpr_const(n, u.constant());
  for (const auto& s : u.summands()) r.terms.push_back(cexpr_monomial(n, s.coeff, padded(s.exps, n)).terms.front());
  return normalize(r);
}

CExpr pow_image(const CExpr& img, const Rat& r, const Cell& target)
{
  const int n = img.nvars;
  if (r == 0) return cexpr_const(n, Rat(1));
  if (img.terms.empty()) {
    if (r > 0) return CExpr{n, {}};
    fail(ErrorKind::DomainError, "zero raised to a non-positive power");
  }
  if (is_integer(r) && r > 0 && (img.terms.size() > 1 || !log_free(img)))
    return pow(img, static_cast<unsigned>(to_long(r)));
  if (img.terms.size() == 1) {
    const Term& t = img.terms.front();
    if (!log_free(img)) fail(ErrorKind::FragmentEscape, "negative or fractional power of a logarithmic expression");
    auto q = signed_pow(t.coeff, r);
    if (!q) fail(ErrorKind::FragmentEscape, "irrational constant " + to_string(t.coeff) + "^(" + to_string(r) + ")");
    ScaledUnit su;
    auto st = unit_pow(t.unit, r, su);
    if (st != UnitStatus::Ok) {
      if (is_integer(r) && r > 0) return pow(img, static_cast<unsigned>(to_long(r)));
      fail(ErrorKind::FragmentEscape, "non-integer or negative power of a polynomial unit");
    }
    Term p = make_term(n, *q * su.scale);
    p.exps = exp_scale(t.exps, r);
    p.unit = su.unit;
    return normalize(CExpr{n, {p}});
  }
  if (is_integer(r) && r > 0) return pow(img, static_cast<unsigned>(to_long(r)));
  auto f = factor_mono_unit(img, target);
  if (!f) fail(ErrorKind::FragmentEscape, "power of a sum that is not a monomial times a unit");
  Term t = make_term(n, f->coeff);
  t.exps = f->exps;
  t.unit = f->unit;
  return pow_image(CExpr{n, {t}}, r, target);
}

CExpr log_abs(const CExpr& arg, const Cell& target)
{
  const int n = arg.nvars;
  if (arg.terms.empty()) fail(ErrorKind::DomainError, "log(0)");
  auto f = factor_mono_unit(arg, target);
  if (!f) fail(ErrorKind::FragmentEscape, "log argument is not a monomial times a unit on this cell");
  CExpr r = cexpr_log_const(n, f->coeff);
  for (int j = 0; j < n; ++j)
    if (f->exps[j] != 0) r = add(r, scale(cexpr_logvar(n, j), f->exps[j]));
  if (f->unit.pure_monomial()) {
    const auto& m = f->unit.summands().front();
    for (int j = 0; j < n; ++j)
      if (j < static_cast<int>(m.exps.size()) && m.exps[j] != 0) r = add(r, scale(cexpr_logvar(n, j), m.exps[j]));
  } else if (!f->unit.trivial()) {
    Term t = make_term(n);
    t.extras[LogAtom::of_unit(f->unit)] = 1;
    r = add(r, cexpr_term(t));
  }
  return r;
}

CExpr compose(const CExpr& e, const std::vector<CExpr>& images, const Cell& target)
{
  if (static_cast<int>(images.size()) != e.nvars) fail(ErrorKind::Internal, "compose: image count mismatch");
  const int n = images.empty() ? target.size() : images.front().nvars;
  CExpr out{n, {}};
  for (const auto& t : e.terms) {
    CExpr acc = cexpr_const(n, t.coeff);
    for (int pos = 0; pos < e.nvars; ++pos) {
      if (t.exps[pos] != 0) acc = mul(acc, pow_image(images[pos], t.exps[pos], target));
      if (t.logs[pos] != 0)
        acc = mul(acc, pow(log_abs(images[pos], target), static_cast<unsigned>(t.logs[pos])));
    }
    for (const auto& [atom, k] : t.extras) {
      switch (atom.kind) {
        case LogAtom::Kind::Var: {
          CExpr arg = sub(images.at(atom.pos), cexpr_const(n, atom.center));
          acc = mul(acc, pow(log_abs(arg, target), static_cast<unsigned>(k)));
          break;
        }
        case LogAtom::Kind::Const: {
          Term c = make_term(n);
          c.extras[atom] = k;
          acc = mul(acc, cexpr_term(c));
          break;
        }
        case LogAtom::Kind::Unit: {
          CExpr ue = compose(unit_as_cexpr(atom.unit, e.nvars), images, target);
          acc = mul(acc, pow(log_abs(ue, target), static_cast<unsigned>(k)));
          break;
        }
      }
    }
    if (!t.unit.trivial()) {
      CExpr ue = compose(unit_as_cexpr(t.unit, e.nvars), images, target);
      auto f = factor_mono_unit(ue, target);
      if (f) {
        Term u = make_term(n, f->coeff);
        u.exps = f->exps;
        u.unit = f->unit;
        acc = mul(acc, cexpr_term(u));
      } else {
        acc = mul(acc, ue);
      }
    }
    out.terms.insert(out.terms.end(), acc.terms.begin(), acc.terms.end());
  }
  return normalize(out);
}

std::optional<Rat> eval_exact(const CExpr& e, const std::vector<Rat>& point)
{
  Rat sum = 0;
  for (const auto& t : e.terms) {
    if (!t.extras.empty()) return std::nullopt;
    Rat v = t.coeff;
    for (int j = 0; j < t.nvars(); ++j) {
      if (t.logs[j] != 0) return std::nullopt;
      if (t.exps[j] == 0) continue;
      auto p = signed_pow(point.at(j), t.exps[j]);
      if (!p) return std::nullopt;
      v *= *p;
    }
    Rat u = t.unit.constant();
    for (const auto& s : t.unit.summands()) {
      Rat m = s.coeff;
      for (std::size_t j = 0; j < s.exps.size(); ++j) {
        if (s.exps[j] == 0) continue;
        auto p = signed_pow(point.at(j), s.exps[j]);
        if (!p) return std::nullopt;
        m *= *p;
      }
      u += m;
    }
    sum += v * u;
  }
  return sum;
}

std::vector<CExpr> identity_images(int n)
{
  std::vector<CExpr> r;
  for (int i = 0; i < n; ++i) r.push_back(cexpr_var(n, i));
  return r;
}

// ---------------------------------------------------------------- normalize_cell

namespace {

Bound bound_from(const CExpr& v, const Cell& c, int n)
{
  if (v.terms.empty()) return Bound::zero(n);
  auto f = factor_mono_unit(v, c);
  if (!f || f->coeff <= 0) fail(ErrorKind::InconsistentOrientation, "normalized bound is not a positive monomial");
  return Bound::monomial(n, f->coeff, f->exps, f->unit);
}

CExpr reciprocal(const CExpr& v, const Cell& c)
{
  auto f = factor_mono_unit(v, c);
  if (!f) fail(ErrorKind::InconsistentOrientation, "bound is not a monomial times a unit");
  if (!f->unit.trivial()) fail(ErrorKind::FragmentEscape, "reciprocal of a bound with a nontrivial unit");
  return cexpr_monomial(v.nvars, Rat(1) / f->coeff, exp_scale(f->exps, Rat(-1)));
}

ExtRange range_of(const CExpr& v, const Cell& c)
{
  if (v.terms.empty()) return ExtRange{Rat(0), Rat(0)};
  auto f = factor_mono_unit(v, c);
  if (!f) fail(ErrorKind::InconsistentOrientation, "bound is not sign-definite on the base");
  return value_range(*f, c);
}

bool certified_less(const Bound& a, const Bound& b, const Cell& c)
{
  if (a.is_zero()) return true;
  const Term& ta = a.term();
  const Term& tb = b.term();
  ExpVec ratio = exp_sub(ta.exps, tb.exps);
  auto r = monomial_range(c, ratio);
  if (!r) return false;
  Rat sup = ta.coeff / tb.coeff * r->second * ta.unit.upper_bound() / tb.unit.lower_bound();
  if (sup < 1) return true;
  // on an open cell a nonconstant monomial never reaches the end of its range,
  // so neither does a unit with a nonconstant summand
  return sup == 1 && (!all_zero(ratio) || !ta.unit.trivial() || !tb.unit.trivial());
}

}  // namespace

NormalizedCell normalize_cell(const Cell& c)
{
  NormalizedCell nc;
  nc.source = c;
  const int n = c.size();
  const int d = c.dim();
  nc.new_index.assign(static_cast<std::size_t>(n), -1);
  Cell out;
  std::vector<CExpr> G(static_cast<std::size_t>(n), CExpr{d, {}});
  CExpr jac = cexpr_const(d, Rat(1));
  int next = 0;

  for (int i = 0; i < n; ++i) {
    const VarSpec& v = c.vars[i];
    auto pull = [&](const Bound& b) {
      CExpr val = b.value;
      if (val.nvars != n) val = resize(val, n);
      return compose(val, G, out);
    };
    if (!v.fat) {
      if (!v.lower.finite()) fail(ErrorKind::InconsistentOrientation, "thin variable with an infinite value");
      G[i] = pull(v.lower);
      continue;
    }
    const bool low_inf = v.lower.kind == Bound::Kind::NegInf;
    const bool up_inf = v.upper.kind == Bound::Kind::PosInf;
    if (v.lower.kind == Bound::Kind::PosInf || v.upper.kind == Bound::Kind::NegInf)
      fail(ErrorKind::InconsistentOrientation, "empty fiber for " + v.name);
    if ((low_inf || up_inf) && v.center != 0)
      fail(ErrorKind::InconsistentOrientation, "unbounded fiber of " + v.name + " needs center 0");

    CExpr vl = low_inf ? CExpr{d, {}} : sub(pull(v.lower), cexpr_const(d, v.center));
    CExpr vu = up_inf ? CExpr{d, {}} : sub(pull(v.upper), cexpr_const(d, v.center));
    ExtRange rl = low_inf ? ExtRange{} : range_of(vl, out);
    ExtRange ru = up_inf ? ExtRange{} : range_of(vu, out);

    int eps = 0;
    int zeta = 0;
    if (!low_inf && rl.lo && *rl.lo >= 0 && !up_inf && ru.hi && *ru.hi <= 1) {
      eps = 1;
      zeta = 1;
    } else if (!low_inf && rl.lo && *rl.lo >= 1) {
      eps = 1;
      zeta = -1;
    } else if (!up_inf && ru.hi && *ru.hi <= 0 && !low_inf && rl.lo && *rl.lo >= -1) {
      eps = -1;
      zeta = 1;
    } else if (!up_inf && ru.hi && *ru.hi <= -1) {
      eps = -1;
      zeta = -1;
    } else {
      fail(ErrorKind::InconsistentOrientation, "fiber of " + v.name + " is not inside one of (0,1), (1,inf), (-1,0), (-inf,-1) after centering");
    }
    if ((v.eps != 0 && v.eps != eps) || (v.zeta != 0 && v.zeta != zeta))
      fail(ErrorKind::InconsistentOrientation, "declared orientation of " + v.name + " does not match its fiber");

    CExpr L, U;
    if (eps == 1 && zeta == 1) {
      L = vl;
      U = vu;
    } else if (eps == 1) {
      L = up_inf ? CExpr{d, {}} : reciprocal(vu, out);
      U = reciprocal(vl, out);
    } else if (zeta == 1) {
      L = neg(vu);
      U = neg(vl);
    } else {
      L = low_inf ? CExpr{d, {}} : reciprocal(neg(vl), out);
      U = reciprocal(neg(vu), out);
    }
    Bound lb = bound_from(L, out, d);
    Bound ub = bound_from(U, out, d);
    if (!certified_less(lb, ub, out))
      fail(ErrorKind::InconsistentOrientation, "cannot certify lower < upper for " + v.name);

    const int y = next++;
    nc.new_index[i] = y;
    CExpr img = cexpr_monomial(d, Rat(eps), [&] {
      ExpVec e = zero_exps(d);
      e[y] = zeta;
      return e;
    }());
    G[i] = add(cexpr_const(d, v.center), img);
    if (zeta == -1) {
      ExpVec e = zero_exps(d);
      e[y] = -2;
      jac = mul(jac, cexpr_monomial(d, Rat(1), e));
    }
    VarSpec nv;
    nv.name = v.name;
    nv.fat = true;
    nv.center = 0;
    nv.eps = 1;
    nv.zeta = 1;
    nv.lower = lb;
    nv.upper = ub;
    out.vars.push_back(nv);
    nc.source.vars[i].eps = eps;
    nc.source.vars[i].zeta = zeta;
  }
  nc.cell = out;
  nc.G = G;
  nc.jacobian = jac;
  return nc;
}

std::optional<std::vector<Rat>> apply_G(const NormalizedCell& nc, const std::vector<Rat>& y)
{
  std::vector<Rat> x;
  for (const auto& g : nc.G) {
    auto v = eval_exact(g, y);
    if (!v) return std::nullopt;
    x.push_back(*v);
  }
  return x;
}

std::vector<Rat> apply_F(const NormalizedCell& nc, const std::vector<Rat>& x)
{
  std::vector<Rat> y(static_cast<std::size_t>(nc.cell.size()));
  for (int i = 0; i < nc.source.size(); ++i) {
    const int k = nc.new_index[i];
    if (k < 0) continue;
    const VarSpec& v = nc.source.vars[i];
    Rat t = Rat(v.eps) * (x.at(i) - v.center);
    y[k] = v.zeta == 1 ? t : Rat(1) / t;
  }
  return y;
}

// ---------------------------------------------------------------- classify

AsymClass classify(const Cell& c)
{
  AsymClass a;
  for (const auto& v : c.vars) {
    const bool constrained = v.fat && v.lower.finite() && !v.lower.is_zero();
    bool determined = false;
    if (constrained && v.lower.is_monomial() && v.upper.is_monomial()) {
      const ExpVec& al = v.lower.term().exps;
      const ExpVec& be = v.upper.term().exps;
      determined = al == be || monomial_range(c, exp_sub(be, al)).has_value();
    }
    a.constrained.push_back(constrained);
    a.determined.push_back(determined);
  }
  return a;
}

// ---------------------------------------------------------------- transform H

HTransform transform_H(const Cell& c)
{
  if (!c.normalized()) fail(ErrorKind::NotPrepared, "transform_H needs a normalized cell");
  const int n = c.size();
  HTransform h;
  h.images = identity_images(n);
  Cell cur = c;
  for (int guard = 0; guard <= n; ++guard) {
    AsymClass cls = classify(cur);
    int d = -1;
    for (int i = 0; i < n; ++i)
      if (cls.determined[i]) {
        d = i;
        break;
      }
    if (d < 0) {
      h.cell = cur;
      return h;
    }
    const Term& lo = cur.vars[d].lower.term();
    const Term& up = cur.vars[d].upper.term();
    if (lo.exps != up.exps)
      fail(ErrorKind::NotPrepared, "determined variable " + cur.vars[d].name + " has bounds with different exponents");

    Term ut = make_term(n, lo.coeff);
    ut.unit = lo.unit;
    Term vt = make_term(n, up.coeff);
    vt.unit = up.unit;
    CExpr u = cexpr_term(ut);
    CExpr P = expand_units(sub(cexpr_term(vt), u));
    Cell base = cur.prefix(d);
    // v - u may vanish at the origin (u = 1/2, v = (1 + y1)/2); then it is a
    // monomial times a unit and the new fiber ends at that monomial
    auto pu = factor_mono_unit(resize(P, d), base);
    auto gr = pu ? monomial_range(base, pu->exps) : std::nullopt;
    if (!pu || pu->coeff <= 0 || !gr) fail(ErrorKind::NotPrepared, "cannot certify upper - lower > 0 for " + cur.vars[d].name);
    const Rat R = pu->coeff * pu->unit.upper_bound() * gr->second;
    ExpVec gamma = pu->exps;
    gamma.resize(static_cast<std::size_t>(n), Rat(0));

    std::vector<CExpr> step = identity_images(n);
    step[d] = mul(cexpr_monomial(n, Rat(1), lo.exps), add(scale(cexpr_var(n, d), R), u));

    Cell next = base;
    VarSpec vd = cur.vars[d];
    vd.lower = Bound::zero(n);
    vd.upper = Bound::monomial(n, pu->coeff / R, gamma, resize(pu->unit, n));
    next.vars.push_back(vd);
    for (int e = d + 1; e < n; ++e) {
      VarSpec ve = cur.vars[e];
      if (!ve.lower.is_zero()) ve.lower = bound_from(compose(ve.lower.value, step, next), next, n);
      ve.upper = bound_from(compose(ve.upper.value, step, next), next, n);
      next.vars.push_back(ve);
    }
    for (auto& img : h.images) img = compose(img, step, next);
    h.steps.push_back({d, R});
    cur = next;
  }
  fail(ErrorKind::Internal, "transform_H did not terminate");
}

}  // namespace cf
