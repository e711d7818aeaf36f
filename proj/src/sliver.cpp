#include "cf/sliver.hpp"

#include <cmath>

namespace cf {

Rat AffineForm::eval(const std::vector<Rat>& t) const
{
  Rat v = constant;
  for (std::size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * t.at(j);
  return v;
}

double AffineForm::eval(const std::vector<double>& t) const
{
  double v = to_double(constant);
  for (std::size_t j = 0; j < coeffs.size(); ++j) v += to_double(coeffs[j]) * t.at(j);
  return v;
}

bool operator==(const AffineForm& a, const AffineForm& b)
{
  if (a.constant != b.constant) return false;
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Rat x = j < a.coeffs.size() ? a.coeffs[j] : Rat(0);
    const Rat y = j < b.coeffs.size() ? b.coeffs[j] : Rat(0);
    if (x != y) return false;
  }
  return true;
}

AffineForm operator-(const AffineForm& a, const AffineForm& b)
{
  AffineForm r;
  r.constant = a.constant - b.constant;
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  for (std::size_t j = 0; j < n; ++j) {
    const Rat x = j < a.coeffs.size() ? a.coeffs[j] : Rat(0);
    const Rat y = j < b.coeffs.size() ? b.coeffs[j] : Rat(0);
    r.coeffs.push_back(x - y);
  }
  return r;
}

Rat min_over(const AffineForm& f, const Box& box)
{
  Rat v = f.constant;
  for (std::size_t j = 0; j < f.coeffs.size(); ++j) {
    if (f.coeffs[j] == 0) continue;
    const Interval& I = box.at(j);
    v += f.coeffs[j] > 0 ? f.coeffs[j] * I.lo : f.coeffs[j] * I.hi;
  }
  return v;
}

Rat max_over(const AffineForm& f, const Box& box)
{
  Rat v = f.constant;
  for (std::size_t j = 0; j < f.coeffs.size(); ++j) {
    if (f.coeffs[j] == 0) continue;
    const Interval& I = box.at(j);
    v += f.coeffs[j] > 0 ? f.coeffs[j] * I.hi : f.coeffs[j] * I.lo;
  }
  return v;
}

AffineForm pull_exponent(const ExpVec& alpha)
{
  AffineForm f;
  f.constant = alpha.empty() ? Rat(0) : alpha[0];
  for (std::size_t j = 1; j < alpha.size(); ++j) f.coeffs.push_back(alpha[j]);
  return f;
}

namespace {

// Halves every interval toward the corner where f is largest.
Box halve_toward_max(const AffineForm& f, const Box& box)
{
  Box out = box;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const Rat c = j < f.coeffs.size() ? f.coeffs[j] : Rat(0);
    Interval& I = out[j];
    const Rat mid = (I.lo + I.hi) / 2;
    if (c > 0) I.lo = mid;
    else if (c < 0) I.hi = mid;
  }
  return out;
}

std::string box_text(const Box& b)
{
  std::string s;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (j > 0) s += " x ";
    s += "(" + to_string(b[j].lo) + ", " + to_string(b[j].hi) + ")";
  }
  return s.empty() ? "()" : s;
}

// Largest |log(q u)| over the unit's certified range.
Rat log_magnitude(const Term& bound)
{
  const Rat lo = bound.coeff * bound.unit.lower_bound();
  const Rat hi = bound.coeff * bound.unit.upper_bound();
  if (lo <= 0) fail(ErrorKind::NotPrepared, "bound is not positive");
  auto a = log_enclosure(lo);
  auto b = log_enclosure(hi);
  Rat m = rat_abs(a.first);
  for (const Rat& v : {rat_abs(a.second), rat_abs(b.first), rat_abs(b.second)})
    if (v > m) m = v;
  return m;
}

// Dyadic 2^-m with 2^-m <= exp(-K / delta).
Rat dyadic_below_exp(const Rat& K, const Rat& delta)
{
  if (K == 0) return Rat(1);
  const Rat ln2_lo = log_enclosure(Rat(2)).first;
  const Rat need = K / (delta * ln2_lo);
  mpz_class m = need.get_num() / need.get_den();
  if (Rat(m) < need) m += 1;
  if (m > 100000) fail(ErrorKind::NotBounded, "sliver epsilon underflows");
  Rat e = 1;
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, m.get_ui());
  e = Rat(1) / Rat(p);
  return e;
}

}  // namespace

Sliver restrict_box(const Sliver& s, const Box& box, const std::string& why)
{
  Sliver out = s;
  for (std::size_t j = 0; j < box.size(); ++j)
    if (box[j].lo < s.box.at(j).lo || box[j].hi > s.box.at(j).hi || box[j].lo >= box[j].hi)
      fail(ErrorKind::Internal, "restrict_box: not a sub-box");
  out.box = box;
  out.history.push_back(why + ": " + box_text(box));
  return out;
}

Separation separate(const std::vector<AffineForm>& forms, const Box& box)
{
  if (forms.empty()) fail(ErrorKind::EmptyExpr, "nothing to separate");
  Separation out;
  bool all_equal = true;
  for (const auto& f : forms)
    if (!(f == forms.front())) all_equal = false;
  if (all_equal) {
    out.index = 0;
    out.margin = 1;
    out.box = box;
    return out;
  }
  const std::size_t m = box.size();
  // look for a point where one class of equal forms is strictly lowest
  std::vector<Rat> point(m);
  const Rat fractions[] = {Rat(1, 2), Rat(1, 3), Rat(2, 3), Rat(1, 5), Rat(4, 5), Rat(1, 7), Rat(6, 7), Rat(1, 11), Rat(10, 11)};
  for (int attempt = 0; attempt < 400; ++attempt) {
    for (std::size_t j = 0; j < m; ++j) {
      const Rat& f = fractions[(attempt / (j == 0 ? 1 : 9 * static_cast<int>(j)) + static_cast<int>(j)) % 9];
      point[j] = box[j].lo + (box[j].hi - box[j].lo) * f;
    }
    int best = 0;
    for (std::size_t i = 1; i < forms.size(); ++i)
      if (forms[i].eval(point) < forms[best].eval(point)) best = static_cast<int>(i);
    const Rat low = forms[best].eval(point);
    std::optional<Rat> gap;
    bool tie = false;
    for (std::size_t i = 0; i < forms.size(); ++i) {
      if (forms[i] == forms[best]) continue;
      const Rat d = forms[i].eval(point) - low;
      if (d <= 0) tie = true;
      if (!gap || d < *gap) gap = d;
    }
    if (tie || !gap) continue;
    const Rat c = *gap / 2;
    // shrink around the point until the margin holds on the whole sub-box
    Rat h = 1;
    for (int k = 0; k < 200; ++k, h /= 2) {
      Box V(m);
      for (std::size_t j = 0; j < m; ++j) {
        const Rat w = (box[j].hi - box[j].lo) * h / 2;
        V[j].lo = point[j] - w < box[j].lo ? box[j].lo : Rat(point[j] - w);
        V[j].hi = point[j] + w > box[j].hi ? box[j].hi : Rat(point[j] + w);
      }
      bool ok = true;
      for (std::size_t i = 0; i < forms.size() && ok; ++i) {
        if (forms[i] == forms[best]) continue;
        if (min_over(forms[i] - forms[best], V) < c) ok = false;
      }
      if (ok) {
        out.index = best;
        out.margin = c;
        out.box = V;
        return out;
      }
    }
  }
  fail(ErrorKind::Internal, "separate: no separating point found");
}

DecayShrink shrink_for_decay(const ExpVec& beta, const Sliver& s)
{
  const AffineForm f = pull_exponent(beta);
  Box box = s.box;
  for (int k = 0; k < 200; ++k) {
    const Rat lo = min_over(f, box);
    if (lo > 0) {
      DecayShrink out{s, lo};
      if (k > 0) out.sliver = restrict_box(s, box, "decay");
      return out;
    }
    if (max_over(f, box) <= 0) break;
    box = halve_toward_max(f, box);
  }
  fail(ErrorKind::NotBounded, "exponent form is not positive on any sub-box");
}

Sliver build_sliver(const Cell& c)
{
  if (!c.normalized()) fail(ErrorKind::NotPrepared, "build_sliver needs a normalized cell");
  const int n = c.size();
  const AsymClass cls = classify(c);
  for (int i = 0; i < n; ++i)
    if (cls.determined[i]) fail(ErrorKind::NotAllUndetermined, c.vars[i].name + " is determined");
  Sliver s;
  if (n == 0) {
    s.epsilon = Rat(1, 2);
    return s;
  }
  const Term& top = c.vars[0].upper.term();
  if (!all_zero(top.exps) || !c.vars[0].lower.is_zero())
    fail(ErrorKind::NotPrepared, "first variable must range over (0, q)");
  Rat eps = Rat(1, 2);
  const Rat q1 = top.coeff * top.unit.lower_bound();
  if (q1 < eps) eps = q1;
  s.delta.push_back(Rat(0));

  for (int k = 1; k < n; ++k) {
    const VarSpec& v = c.vars[k];
    ExpVec beta = v.upper.term().exps;
    beta.resize(static_cast<std::size_t>(k), Rat(0));
    const AffineForm B = pull_exponent(beta);
    Rat K = log_magnitude(v.upper.term());
    Interval I;
    Rat delta;
    if (v.lower.is_zero()) {
      delta = Rat(1, 4);
      Rat base = max_over(B, s.box);
      if (base < 0) base = 0;
      I = {base + delta, base + 3 * delta};
    } else {
      ExpVec alpha = v.lower.term().exps;
      alpha.resize(static_cast<std::size_t>(k), Rat(0));
      const AffineForm A = pull_exponent(alpha);
      const Rat KA = log_magnitude(v.lower.term());
      if (KA > K) K = KA;
      int guard = 0;
      while (min_over(A, s.box) - max_over(B, s.box) <= 0) {
        if (++guard > 200 || max_over(A - B, s.box) <= 0)
          fail(ErrorKind::NotBounded, "no room between the bounds of " + v.name);
        // halve toward where A - B is largest; coordinates it ignores still
        // move A and B, so those are squeezed about their midpoint
        const AffineForm D = A - B;
        Box next = halve_toward_max(D, s.box);
        for (std::size_t j = 0; j < next.size(); ++j) {
          if (j < D.coeffs.size() && D.coeffs[j] != 0) continue;
          const bool moves = (j < A.coeffs.size() && A.coeffs[j] != 0) || (j < B.coeffs.size() && B.coeffs[j] != 0);
          if (!moves) continue;
          const Rat w = (next[j].hi - next[j].lo) / 4;
          next[j].lo += w;
          next[j].hi -= w;
        }
        s = restrict_box(s, next, "room for " + v.name);
      }
      const Rat hiA = min_over(A, s.box);
      const Rat loB = max_over(B, s.box);
      delta = (hiA - loB) / 4;
      I = {loB + delta, hiA - delta};
      if (I.lo <= 0) fail(ErrorKind::NotPrepared, "sliver interval for " + v.name + " is not positive");
    }
    s.box.push_back(I);
    s.delta.push_back(delta);
    const Rat e = dyadic_below_exp(K, delta);
    if (e < eps) eps = e;
  }
  s.epsilon = eps;
  return s;
}

std::vector<double> sliver_logs(double log_t1, const std::vector<double>& t)
{
  std::vector<double> out{log_t1};
  for (double tj : t) out.push_back(tj * log_t1);
  return out;
}

namespace {

double log_bound(const Term& b, const std::vector<double>& logs)
{
  double v = std::log(to_double(b.coeff));
  for (std::size_t j = 0; j < b.exps.size() && j < logs.size(); ++j)
    if (b.exps[j] != 0) v += to_double(b.exps[j]) * logs[j];
  if (!b.unit.trivial()) {
    double u = to_double(b.unit.constant());
    for (const auto& s : b.unit.summands()) {
      double e = 0;
      for (std::size_t j = 0; j < s.exps.size() && j < logs.size(); ++j)
        if (s.exps[j] != 0) e += to_double(s.exps[j]) * logs[j];
      u += to_double(s.coeff) * std::exp(e);
    }
    if (!(u > 0)) return std::nan("");
    v += std::log(u);
  } else {
    v += std::log(to_double(b.unit.constant()));
  }
  return v;
}

}  // namespace

bool sliver_point_in_cell(const Cell& c, double log_t1, const std::vector<double>& t)
{
  const std::vector<double> logs = sliver_logs(log_t1, t);
  for (int k = 0; k < c.size(); ++k) {
    const VarSpec& v = c.vars[k];
    const double x = logs[k];
    if (!v.lower.is_zero()) {
      const double lo = log_bound(v.lower.term(), logs);
      if (!(x > lo)) return false;
    }
    const double hi = log_bound(v.upper.term(), logs);
    if (!(x < hi)) return false;
  }
  return true;
}

}  // namespace cf
