#include "cf/frontend.hpp"

#include <cmath>

namespace cf {

namespace {

CExpr lower_rec(const Ast& a, const std::vector<CExpr>* images, const Cell* target, int n)
{
  switch (a.kind) {
    case Ast::Kind::Num: return cexpr_const(n, a.num);
    case Ast::Kind::Var:
      if (images) return images->at(a.var);
      return cexpr_var(n, a.var);
    case Ast::Kind::Neg: return neg(lower_rec(a.kids[0], images, target, n));
    case Ast::Kind::Add: {
      CExpr s{n, {}};
      for (const auto& k : a.kids) s = add(s, lower_rec(k, images, target, n));
      return s;
    }
    case Ast::Kind::Mul: {
      CExpr p = cexpr_const(n, Rat(1));
      for (const auto& k : a.kids) p = mul(p, lower_rec(k, images, target, n));
      return p;
    }
    case Ast::Kind::Pow: {
      CExpr b = lower_rec(a.kids[0], images, target, n);
      if (is_integer(a.num) && a.num >= 0) return pow(b, static_cast<unsigned>(to_long(a.num)));
      if (target) return pow_image(b, a.num, *target);
      if (b.terms.size() != 1)
        fail(ErrorKind::FragmentEscape, "negative or fractional power of a sum needs a cell");
      return pow_image(b, a.num, Cell{});
    }
    case Ast::Kind::Log: {
      CExpr arg = lower_rec(a.kids[0], images, target, n);
      if (target) return log_abs(arg, *target);
      if (arg.terms.empty()) fail(ErrorKind::DomainError, "log(0)");
      if (!log_free(arg)) fail(ErrorKind::FragmentEscape, "log of a logarithmic expression");
      if (arg.terms.size() == 1 && arg.terms[0].unit.trivial()) {
        const Term& t = arg.terms[0];
        CExpr r = cexpr_log_const(n, t.coeff);
        for (int j = 0; j < n; ++j)
          if (t.exps[j] != 0) r = add(r, scale(cexpr_logvar(n, j), t.exps[j]));
        return r;
      }
      // k*y_j + c  ->  log|k| + log|y_j + c/k|
      if (arg.terms.size() == 2) {
        const Term* lin = nullptr;
        const Term* con = nullptr;
        for (const auto& t : arg.terms) {
          if (all_zero(t.exps) && t.unit.trivial()) con = &t;
          else if (t.unit.trivial()) lin = &t;
        }
        if (lin && con) {
          const auto s = support(lin->exps);
          if (s.size() == 1 && lin->exps[s[0]] == 1) {
            CExpr r = cexpr_log_const(n, lin->coeff);
            Term l = make_term(n);
            l.extras[LogAtom::var(s[0], Rat(-con->coeff / lin->coeff))] = 1;
            return add(r, cexpr_term(l));
          }
        }
      }
      fail(ErrorKind::FragmentEscape, "log of a sum needs a cell");
    }
  }
  fail(ErrorKind::Internal, "lower: unknown node");
}

std::string exponent_suffix(const Rat& r)
{
  if (r == 1) return "";
  if (is_integer(r) && r > 0) return "^" + to_string(r);
  return "^(" + to_string(r) + ")";
}

std::string name_of(const std::vector<std::string>& names, int j)
{
  if (j >= 0 && j < static_cast<int>(names.size())) return names[j];
  return "y" + std::to_string(j + 1);
}

std::string monomial_text(const ExpVec& exps, const std::vector<std::string>& names)
{
  std::string s;
  for (std::size_t j = 0; j < exps.size(); ++j) {
    if (exps[j] == 0) continue;
    if (!s.empty()) s += "*";
    s += name_of(names, static_cast<int>(j)) + exponent_suffix(exps[j]);
  }
  return s;
}

// Joins signed pieces as "a + b - c".
std::string signed_join(const std::vector<std::pair<Rat, std::string>>& items)
{
  if (items.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& [c, body] = items[i];
    const Rat mag = rat_abs(c);
    std::string piece;
    if (body.empty()) piece = to_string(mag);
    else if (mag == 1) piece = body;
    else piece = to_string(mag) + "*" + body;
    if (i == 0) s += (c < 0 ? "-" : "") + piece;
    else s += (c < 0 ? " - " : " + ") + piece;
  }
  return s;
}

std::string atom_text(const LogAtom& a, const std::vector<std::string>& names)
{
  switch (a.kind) {
    case LogAtom::Kind::Var: {
      const Rat c = a.center;
      return "log(" + name_of(names, a.pos) + (c > 0 ? " - " : " + ") + to_string(rat_abs(c)) + ")";
    }
    case LogAtom::Kind::Const: return "log(" + a.prime.get_str() + ")";
    case LogAtom::Kind::Unit: return "log(" + to_string(a.unit, names) + ")";
  }
  return "?";
}

std::string term_body(const Term& t, const std::vector<std::string>& names)
{
  std::string s = monomial_text(t.exps, names);
  auto append = [&](const std::string& f) {
    if (!s.empty()) s += "*";
    s += f;
  };
  for (int j = 0; j < t.nvars(); ++j)
    if (t.logs[j] != 0) append("log(" + name_of(names, j) + ")" + exponent_suffix(Rat(t.logs[j])));
  for (const auto& [atom, k] : t.extras) append(atom_text(atom, names) + exponent_suffix(Rat(k)));
  if (!t.unit.trivial()) append("(" + to_string(t.unit, names) + ")");
  else if (t.unit.constant() != 1) append(to_string(t.unit.constant()));
  return s;
}

}  // namespace

CExpr lower(const Ast& a, const std::vector<CExpr>& images, const Cell& target)
{
  return lower_rec(a, &images, &target, target.size());
}

CExpr lower_plain(const Ast& a, int nvars) { return lower_rec(a, nullptr, nullptr, nvars); }

std::string to_string(const PolyUnit& u, const std::vector<std::string>& names)
{
  std::vector<std::pair<Rat, std::string>> items;
  if (u.constant() != 0) items.push_back({u.constant(), ""});
  for (const auto& s : u.summands()) items.push_back({s.coeff, monomial_text(s.exps, names)});
  return signed_join(items);
}

std::string to_string(const CExpr& e, const std::vector<std::string>& names)
{
  std::vector<std::pair<Rat, std::string>> items;
  for (const auto& t : e.terms) items.push_back({t.coeff, term_body(t, names)});
  return signed_join(items);
}

std::string to_string(const Bound& b, const std::vector<std::string>& names)
{
  switch (b.kind) {
    case Bound::Kind::NegInf: return "-inf";
    case Bound::Kind::PosInf: return "inf";
    case Bound::Kind::Finite: break;
  }
  return to_string(b.value, names);
}

std::string to_string(const Cell& c)
{
  const auto names = c.names();
  std::string out = "{";
  for (int i = 0; i < c.size(); ++i) {
    const VarSpec& v = c.vars[i];
    if (i > 0) out += ", ";
    if (!v.fat) {
      out += names[i] + " = " + to_string(v.lower, names);
      continue;
    }
    out += to_string(v.lower, names) + " < " + names[i] + " < " + to_string(v.upper, names);
    if (v.center != 0) out += " center " + to_string(v.center);
  }
  return out + "}";
}

std::vector<std::string> default_names(int n, const std::string& stem)
{
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

Cell source_cell(const SourceForm& s)
{
  const int n = static_cast<int>(s.chains.size());
  Cell c;
  for (const auto& ch : s.chains) {
    VarSpec v;
    v.name = ch.name;
    v.fat = !ch.thin;
    v.center = ch.center;
    auto lower_bound = [&](const Ast& a) {
      Bound b;
      b.kind = Bound::Kind::Finite;
      b.value = lower_plain(a, n);
      if (!log_free(b.value)) fail(ErrorKind::FragmentEscape, "cell bounds must be free of logarithms");
      return b;
    };
    v.lower = ch.lower_inf ? Bound::neg_inf() : lower_bound(ch.lower);
    if (!ch.thin) v.upper = ch.upper_inf ? Bound::pos_inf() : lower_bound(ch.upper);
    c.vars.push_back(std::move(v));
  }
  return c;
}

double eval_ast(const Ast& a, const std::vector<double>& p)
{
  switch (a.kind) {
    case Ast::Kind::Num: return to_double(a.num);
    case Ast::Kind::Var: return p.at(a.var);
    case Ast::Kind::Neg: return -eval_ast(a.kids[0], p);
    case Ast::Kind::Add: {
      double s = 0;
      for (const auto& k : a.kids) s += eval_ast(k, p);
      return s;
    }
    case Ast::Kind::Mul: {
      double s = 1;
      for (const auto& k : a.kids) s *= eval_ast(k, p);
      return s;
    }
    case Ast::Kind::Pow: {
      const double b = eval_ast(a.kids[0], p);
      if (is_integer(a.num)) return std::pow(b, to_double(a.num));
      return std::pow(std::fabs(b), to_double(a.num));
    }
    case Ast::Kind::Log: return std::log(std::fabs(eval_ast(a.kids[0], p)));
  }
  return 0;
}

}  // namespace cf
