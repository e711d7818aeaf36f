#include "cf/prepare.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace cf {

// ------------------------------------------------------------ compare_centers

std::vector<CenterPiece> compare_centers(const Rat& t1, const Rat& t2, const Cell& c)
{
  if (t1 == t2) fail(ErrorKind::EqualCenters, "centers coincide");
  const VarSpec& v = c.vars.at(c.size() - 1);
  if (!v.fat) fail(ErrorKind::NotPrepared, "compare_centers needs a fat last variable");
  std::optional<Rat> lo, hi;
  if (v.lower.finite()) {
    lo = v.lower.as_constant();
    if (!lo) fail(ErrorKind::NotPrepared, "compare_centers needs constant fiber bounds");
  }
  if (v.upper.finite()) {
    hi = v.upper.as_constant();
    if (!hi) fail(ErrorKind::NotPrepared, "compare_centers needs constant fiber bounds");
  }
  const Rat delta = t1 - t2;
  const Rat w = kCenterA * rat_abs(delta);
  std::set<Rat> cuts;
  for (const Rat& p : {Rat(t1 - w), Rat(t1 + w), Rat(t2 - w), Rat(t2 + w)})
    if ((!lo || p > *lo) && (!hi || p < *hi)) cuts.insert(p);

  std::vector<std::optional<Rat>> ends{lo};
  for (const auto& p : cuts) ends.push_back(p);
  ends.push_back(hi);

  std::vector<CenterPiece> out;
  for (std::size_t k = 0; k + 1 < ends.size(); ++k) {
    CenterPiece piece;
    piece.lo = ends[k];
    piece.hi = ends[k + 1];
    Rat mid;
    if (piece.lo && piece.hi) mid = (*piece.lo + *piece.hi) / 2;
    else if (piece.lo) mid = *piece.lo + 1;
    else if (piece.hi) mid = *piece.hi - 1;
    else mid = t1 + 2 * rat_abs(delta) + 1;
    // bracket values at the ends; an infinite end gives the limit 1 in the far case
    auto bracket = [&](const std::optional<Rat>& y) -> Rat {
      switch (piece.kase) {
        case CenterCase::NearFirst: return 1 + (*y - t1) / delta;
        case CenterCase::NearSecond: return 1 - (*y - t2) / delta;
        case CenterCase::Far: return y ? Rat(1 + delta / (*y - t1)) : Rat(1);
      }
      return Rat(0);
    };
    if (rat_abs(mid - t1) < w) piece.kase = CenterCase::NearFirst;
    else if (rat_abs(mid - t2) < w) piece.kase = CenterCase::NearSecond;
    else piece.kase = CenterCase::Far;
    Rat b1 = bracket(piece.lo);
    Rat b2 = bracket(piece.hi);
    if (b2 < b1) std::swap(b1, b2);
    piece.bracket_lo = b1;
    piece.bracket_hi = b2;
    if (b1 <= 0) fail(ErrorKind::Internal, "compare_centers: bracket not positive");
    out.push_back(piece);
  }
  return out;
}

// ------------------------------------------------------------ absorb / recenter

CExpr absorb_determined(const Term& t, const Cell& c, int pos)
{
  const int n = t.nvars();
  if (pos < 0 || pos >= c.size()) fail(ErrorKind::Internal, "absorb_determined: bad position");
  const AsymClass cls = classify(c);
  if (!cls.determined[pos]) fail(ErrorKind::NotDetermined, c.vars[pos].name + " is not determined");
  const Rat r = t.exps[pos];
  const int l = t.logs[pos];
  if (r == 0 && l == 0) return cexpr_term(t);

  ExpVec beta = c.vars[pos].lower.term().exps;
  beta.resize(static_cast<std::size_t>(n), Rat(0));
  ExpVec ratio = exp_scale(beta, Rat(-1));
  ratio[pos] += 1;
  auto range = monomial_range(c, ratio);
  if (!range) fail(ErrorKind::Internal, "determined ratio has no bound");
  const PolyUnit m = monomial_unit(ratio, range->first, range->second);

  Term base = t;
  base.exps[pos] = 0;
  base.logs[pos] = 0;
  base.exps = exp_add(base.exps, exp_scale(beta, r));
  if (r != 0) {
    ScaledUnit mr, prod;
    if (unit_pow(m, r, mr) != UnitStatus::Ok || unit_mul(base.unit, mr.unit, prod) != UnitStatus::Ok)
      fail(ErrorKind::FragmentEscape, "cannot merge the determined ratio into the unit");
    base.coeff *= mr.scale * prod.scale;
    base.unit = prod.unit;
  }
  CExpr out = cexpr_term(base);
  if (l > 0) {
    Term lm = make_term(n);
    lm.extras[LogAtom::of_unit(m)] = 1;
    CExpr L = cexpr_term(lm);
    for (int j = 0; j < n; ++j)
      if (beta[j] != 0) L = add(L, scale(cexpr_logvar(n, j), beta[j]));
    out = mul(out, pow(L, static_cast<unsigned>(l)));
  }
  return out;
}

Recentered recenter_case2(const Cell& c)
{
  if (c.size() == 0) fail(ErrorKind::NotCase2, "empty cell");
  const VarSpec& v = c.vars.back();
  if (!v.fat || !v.lower.finite() || v.lower.is_zero())
    fail(ErrorKind::NotCase2, "lower bound of " + v.name + " already reaches 0");
  Recentered out;
  out.cell = c;
  out.shift = v.lower.value;
  VarSpec& nv = out.cell.vars.back();
  nv.lower = Bound::zero(v.lower.value.nvars);
  if (v.upper.finite()) nv.upper.value = sub(v.upper.value, v.lower.value);
  return out;
}

// ------------------------------------------------------------ prepare

namespace {

using Shifts = std::vector<std::set<Rat>>;

void shifts_from_arg(const Ast& arg, int n, Shifts& s)
{
  std::set<int> vars;
  std::function<void(const Ast&)> walk = [&](const Ast& a) {
    if (a.kind == Ast::Kind::Var) vars.insert(a.var);
    for (const auto& k : a.kids) walk(k);
  };
  walk(arg);
  if (vars.size() == 1) {
    try {
      CExpr e = lower_plain(arg, n);
      if (e.terms.size() == 2 && log_free(e)) {
        const Term* lin = nullptr;
        const Term* con = nullptr;
        for (const auto& t : e.terms) (all_zero(t.exps) ? con : lin) = &t;
        if (lin && con && lin->unit.trivial() && lin->exps[*vars.begin()] == 1 &&
            support(lin->exps).size() == 1) {
          s[*vars.begin()].insert(-con->coeff / lin->coeff);
          return;
        }
      }
    } catch (const Error&) {
    }
  }
  for (int v : vars) s[v].insert(Rat(0));
}

Shifts shifts_of(const Ast& e, int n)
{
  Shifts s(static_cast<std::size_t>(n));
  std::function<void(const Ast&)> walk = [&](const Ast& a) {
    if (a.kind == Ast::Kind::Log) shifts_from_arg(a.kids[0], n, s);
    if (a.kind == Ast::Kind::Pow && !(is_integer(a.num) && a.num >= 0)) shifts_from_arg(a.kids[0], n, s);
    for (const auto& k : a.kids) walk(k);
  };
  walk(e);
  return s;
}

Shifts shifts_of(const CExpr& e)
{
  Shifts s(static_cast<std::size_t>(e.nvars));
  for (const auto& t : e.terms) {
    for (int j = 0; j < t.nvars(); ++j)
      if (t.logs[j] != 0 || !(is_integer(t.exps[j]) && t.exps[j] >= 0)) s[j].insert(Rat(0));
    for (const auto& [a, k] : t.extras) {
      if (a.kind == LogAtom::Kind::Var) s[a.pos].insert(a.center);
      if (a.kind == LogAtom::Kind::Unit)
        for (int j = 0; j < e.nvars; ++j)
          if (a.unit.depends_on(j)) s[j].insert(Rat(0));
    }
    for (int j = 0; j < e.nvars; ++j)
      if (t.unit.depends_on(j)) s[j].insert(Rat(0));
  }
  return s;
}

struct Side {
  bool infinite = false;
  bool constant = false;
  Rat lo, hi;  // certified range when finite
};

Side side_range(const Bound& b, const NormalizedCell& base, int n)
{
  Side s;
  if (!b.finite()) {
    s.infinite = true;
    return s;
  }
  if (auto q = b.as_constant()) {
    s.constant = true;
    s.lo = s.hi = *q;
    return s;
  }
  CExpr v = compose(resize(b.value, n), base.G, base.cell);
  if (v.terms.empty()) {
    s.constant = true;
    return s;
  }
  auto f = factor_mono_unit(v, base.cell);
  if (!f) fail(ErrorKind::FragmentEscape, "fiber bound is not a monomial times a unit on the base");
  ExtRange r = value_range(*f, base.cell);
  if (!r.lo || !r.hi) fail(ErrorKind::FragmentEscape, "fiber bound is unbounded on the base");
  s.lo = *r.lo;
  s.hi = *r.hi;
  return s;
}

// point strictly inside every fiber: 1, outside every fiber: 0, crossing: -1
int locate(const Rat& p, const Side& lo, const Side& hi)
{
  auto below = [&](const Side& s) { return s.infinite || s.hi < p || (s.hi == p && !s.constant); };
  auto above = [&](const Side& s) { return s.infinite || s.lo > p || (s.lo == p && !s.constant); };
  if (below(lo) && above(hi)) return 1;
  if ((!lo.infinite && lo.lo >= p) || (!hi.infinite && hi.hi <= p)) return 0;
  return -1;
}

class Splitter {
 public:
  Splitter(const Cell& src, Shifts shifts, std::function<CExpr(const NormalizedCell&)> lowerer)
      : src_(src), shifts_(std::move(shifts)), lower_(std::move(lowerer))
  {
    const int n = src_.size();
    shifts_.resize(static_cast<std::size_t>(n));
    extra_.resize(static_cast<std::size_t>(n));
    // Bounds are monomials in earlier variables, so those need center 0 among
    // their candidates.
    for (int i = 0; i < n; ++i)
      for (const Bound* b : {&src_.vars[i].lower, &src_.vars[i].upper})
        if (b->finite())
          for (int j = 0; j < i; ++j)
            if (depends_on(b->value, j)) shifts_[j].insert(Rat(0));
    // A bound q x_j^beta that meets a cut p of its own variable splits x_j at
    // (p/q)^(1/beta). Later variables first, so the new cuts propagate down.
    for (int i = n - 1; i >= 0; --i) {
      const VarSpec& v = src_.vars[i];
      if (!v.fat) continue;
      const std::set<Rat> cuts = cuts_of(i);
      for (const Bound* b : {&v.lower, &v.upper}) {
        if (!b->finite() || b->value.terms.size() != 1) continue;
        const Term& t = b->value.terms.front();
        const auto sup = support(t.exps);
        if (sup.size() != 1 || !t.unit.trivial() || !t.extras.empty()) continue;
        const int j = sup.front();
        for (const Rat& p : cuts) {
          const Rat ratio = p / (t.coeff * t.unit.constant());
          if (ratio <= 0) continue;
          if (auto x = exact_pow(ratio, 1 / t.exps[j])) extra_[j].insert(*x);
        }
      }
    }
  }

  std::vector<PreparedPiece> run()
  {
    Cell partial;
    rec(0, partial);
    return out_;
  }

 private:
  std::set<Rat> centers_of(int i) const
  {
    std::set<Rat> centers = shifts_[i];
    if (src_.vars[i].center != 0) centers = {src_.vars[i].center};
    if (centers.empty()) centers.insert(Rat(0));
    return centers;
  }

  /// Fiber cuts that depend only on the centers: theta, theta +- 1, the
  /// two-center thresholds, and the far cuts of an unbounded fiber.
  std::set<Rat> cuts_of(int i) const
  {
    const VarSpec& v = src_.vars[i];
    const std::set<Rat> centers = centers_of(i);
    std::set<Rat> cuts;
    Rat M = 0;
    for (const auto& t : centers) {
      cuts.insert(t);
      cuts.insert(t - 1);
      cuts.insert(t + 1);
      M = std::max(M, rat_abs(t));
      for (const auto& u : centers)
        if (u != t) {
          cuts.insert(t - kCenterA * rat_abs(t - u));
          cuts.insert(t + kCenterA * rat_abs(t - u));
        }
    }
    if (!v.lower.finite() || !v.upper.finite()) {
      for (const Rat& p : {Rat(-1), Rat(0), Rat(1)}) cuts.insert(p);
      if (M > 0) {
        cuts.insert(1 + kCenterB * M);
        cuts.insert(-1 - kCenterB * M);
      }
    }
    return cuts;
  }

  void rec(int i, Cell& partial)
  {
    const int n = src_.size();
    if (i == n) {
      finish(partial);
      return;
    }
    const VarSpec& v = src_.vars[i];
    if (!v.fat) {
      partial.vars.push_back(v);
      rec(i + 1, partial);
      partial.vars.pop_back();
      return;
    }
    const NormalizedCell base = normalize_cell(partial);
    const Side lo = side_range(v.lower, base, i);
    const Side hi = side_range(v.upper, base, i);

    const std::set<Rat> centers = centers_of(i);
    std::set<Rat> cuts = cuts_of(i);
    cuts.insert(extra_[i].begin(), extra_[i].end());
    std::vector<Rat> inner;
    for (const auto& p : cuts) {
      const int where = locate(p, lo, hi);
      if (where < 0)
        fail(ErrorKind::FragmentEscape, "bound of " + v.name + " crosses the split point " + to_string(p));
      if (where == 1) inner.push_back(p);
    }

    for (std::size_t k = 0; k <= inner.size(); ++k) {
      VarSpec piece = v;
      if (k > 0) piece.lower = Bound::constant(n, inner[k - 1]);
      if (k < inner.size()) piece.upper = Bound::constant(n, inner[k]);
      const bool piece_unbounded = !piece.lower.finite() || !piece.upper.finite();
      // distance ranking from the midpoint of the piece's value range
      const Rat a = k > 0 ? inner[k - 1] : (lo.infinite ? Rat(0) : lo.lo);
      const Rat b = k < inner.size() ? inner[k] : (hi.infinite ? Rat(0) : hi.hi);
      const Rat mid = (a + b) / 2;
      std::vector<Rat> order;
      if (piece_unbounded) order.push_back(Rat(0));
      else order.assign(centers.begin(), centers.end());
      std::stable_sort(order.begin(), order.end(),
                       [&](const Rat& x, const Rat& y) { return rat_abs(x - mid) < rat_abs(y - mid); });

      std::optional<Error> last;
      bool done = false;
      for (const auto& theta : order) {
        piece.center = theta;
        partial.vars.push_back(piece);
        try {
          NormalizedCell nc = normalize_cell(partial);
          const CExpr& img = nc.G[i];
          for (const auto& other : centers)
            if (other != theta) log_abs(sub(img, cexpr_const(img.nvars, other)), nc.cell);
        } catch (const Error& e) {
          partial.vars.pop_back();
          last = e;
          continue;
        }
        // A center can pass the log checks and still fail further down; undo
        // that attempt's pieces and try the next one.
        const std::size_t mark = out_.size();
        try {
          rec(i + 1, partial);
        } catch (const Error& e) {
          partial.vars.pop_back();
          if (e.kind() != ErrorKind::FragmentEscape) throw;
          out_.resize(mark);
          last = e;
          continue;
        }
        partial.vars.pop_back();
        done = true;
        break;
      }
      if (!done) throw last.value_or(Error(ErrorKind::FragmentEscape, "no admissible center for " + v.name));
    }
  }

  void finish(const Cell& c)
  {
    PreparedPiece p;
    p.nc = normalize_cell(c);
    p.expr = lower_(p.nc);
    const AsymClass cls = classify(p.nc.cell);
    for (int j = 0; j < p.nc.cell.size(); ++j)
      if (!cls.determined[j]) p.J.push_back(j);
    p.terms = absorb_all(p.expr, p.nc.cell);
    out_.push_back(std::move(p));
  }

  const Cell& src_;
  Shifts shifts_;
  std::vector<std::set<Rat>> extra_;  // cuts forced by later bounds
  std::function<CExpr(const NormalizedCell&)> lower_;
  std::vector<PreparedPiece> out_;
};

}  // namespace

std::vector<PreparedPiece> prepare(const Ast& e, const Cell& c)
{
  Splitter s(c, shifts_of(e, c.size()), [&](const NormalizedCell& nc) { return lower(e, nc.G, nc.cell); });
  return s.run();
}

std::vector<PreparedPiece> prepare(const SourceForm& s) { return prepare(s.expr, source_cell(s)); }

std::vector<PreparedPiece> prepare_expr(const CExpr& e, const Cell& c)
{
  CExpr x = e.nvars == c.size() ? e : resize(e, c.size());
  Splitter s(c, shifts_of(x), [&](const NormalizedCell& nc) { return compose(x, nc.G, nc.cell); });
  return s.run();
}

CExpr absorb_all(const CExpr& e, const Cell& cell)
{
  const AsymClass cls = classify(cell);
  CExpr cur = e;
  for (int d = cell.size() - 1; d >= 0; --d) {
    if (!cls.determined[d]) continue;
    CExpr next{cur.nvars, {}};
    for (const auto& t : cur.terms) next = add(next, absorb_determined(t, cell, d));
    cur = next;
  }
  return cur;
}

CExpr fiber_integrand(const PreparedPiece& p) { return absorb_all(mul(p.expr, p.nc.jacobian), p.nc.cell); }

bool admissible(const PreparedPiece& p)
{
  const int n = p.nc.cell.size();
  std::vector<bool> inJ(static_cast<std::size_t>(n), false);
  for (int j : p.J) inJ[j] = true;
  for (std::size_t k = 0; k < p.terms.terms.size(); ++k) {
    const Term& t = p.terms.terms[k];
    for (int j = 0; j < n; ++j)
      if (!inJ[j] && (t.exps[j] != 0 || t.logs[j] != 0)) return false;
    for (std::size_t m = 0; m < k; ++m)
      if (compare_signature(p.terms.terms[m], t) == 0) return false;
  }
  return true;
}

}  // namespace cf
