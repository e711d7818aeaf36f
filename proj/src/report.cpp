#include "cf/report.hpp"

#include "cf/frontend.hpp"

#include <string_view>

namespace cf::report {

json rat(const Rat& q) { return to_string(q); }

json exps(const ExpVec& e)
{
  json a = json::array();
  for (const auto& q : e) a.push_back(rat(q));
  return a;
}

namespace {

std::string atom_text(const LogAtom& atom, int n, const std::vector<std::string>& names)
{
  Term t = make_term(n, 1);
  t.extras[atom] = 1;
  return to_string(cexpr_term(t), names);
}

json term(const Term& t, const std::vector<std::string>& names)
{
  json j;
  j["coeff"] = rat(t.coeff);
  j["exps"] = exps(t.exps);
  j["logs"] = t.logs;
  json ex = json::array();
  for (const auto& [a, k] : t.extras) ex.push_back({{"atom", atom_text(a, t.nvars(), names)}, {"power", k}});
  j["extras"] = ex;
  if (t.unit.trivial())
    j["unit"] = nullptr;
  else
    j["unit"] = to_string(t.unit, names);
  return j;
}

std::string message_of(const Error& e)
{
  std::string_view w = e.what();
  const std::string prefix = std::string(error_kind_name(e.kind())) + ": ";
  if (w.substr(0, prefix.size()) == prefix) w.remove_prefix(prefix.size());
  return std::string(w);
}

}  // namespace

json expr(const CExpr& e, const std::vector<std::string>& names)
{
  json j;
  j["text"] = to_string(e, names);
  j["nvars"] = e.nvars;
  json ts = json::array();
  for (const auto& t : e.terms) ts.push_back(term(t, names));
  j["terms"] = ts;
  return j;
}

json cell(const Cell& c)
{
  json j;
  j["text"] = to_string(c);
  json vars = json::array();
  const auto names = c.names();
  for (const auto& v : c.vars) {
    json jv;
    jv["name"] = v.name;
    jv["fat"] = v.fat;
    jv["center"] = rat(v.center);
    jv["lower"] = to_string(v.lower, names);
    jv["upper"] = v.fat ? json(to_string(v.upper, names)) : json(nullptr);
    vars.push_back(jv);
  }
  j["vars"] = vars;
  j["dim"] = c.dim();
  return j;
}

json normalized(const NormalizedCell& nc)
{
  json j;
  j["source"] = cell(nc.source);
  j["cell"] = cell(nc.cell);
  const auto names = nc.cell.names();
  json g = json::array();
  for (const auto& e : nc.G) g.push_back(to_string(e, names));
  j["G"] = g;
  j["jacobian"] = to_string(nc.jacobian, names);
  j["new_index"] = nc.new_index;
  return j;
}

json piece(const PreparedPiece& p)
{
  json j = normalized(p.nc);
  const auto names = p.nc.cell.names();
  j["expr"] = expr(p.expr, names);
  j["terms"] = expr(p.terms, names);
  j["J"] = p.J;
  j["admissible"] = admissible(p);
  return j;
}

json fubini(const FubiniResult& r)
{
  json j;
  json ps = json::array();
  for (const auto& p : r.pieces) {
    json jp;
    jp["source"] = cell(p.source);
    jp["cell"] = cell(p.nc.cell);
    jp["value"] = expr(p.value, p.nc.cell.prefix(p.value.nvars).names());
    jp["measure_zero"] = p.measure_zero;
    ps.push_back(jp);
  }
  j["pieces"] = ps;
  json rs = json::array();
  for (const auto& reg : r.regions) rs.push_back({{"base", cell(reg.base)}, {"value", expr(reg.value, r.names)}});
  j["regions"] = rs;
  j["total"] = r.total ? expr(*r.total, r.names) : json(nullptr);
  j["assumptions"] = r.assumptions;
  return j;
}

json dominance(const DominanceReport& d, const std::vector<std::string>& names)
{
  json j;
  j["rbar"] = rat(d.rbar);
  j["lbar"] = d.lbar;
  j["lbar_prime"] = d.lbar_prime;
  j["I1"] = d.I1;
  j["I2"] = d.I2;
  j["I3"] = d.I3;
  j["I4"] = d.I4;
  j["W"] = to_string(cexpr_term(d.W), names);
  j["sliver"] = sliver(d.sliver);
  j["margin"] = rat(d.margin);
  json pp = json::array();
  for (const auto& q : d.probe_point) pp.push_back(rat(q));
  j["probe_point"] = pp;
  j["leading_value"] = d.leading_value;
  return j;
}

json verdict(const SumVerdict& v, const std::vector<std::string>& names)
{
  json j;
  j["integrable"] = v.integrable;
  j["per_term"] = v.per_term;
  j["dominance"] = v.report ? dominance(*v.report, names) : json(nullptr);
  j["note"] = v.note;
  return j;
}

json decay(const DecayResult& d, const std::vector<std::string>& names)
{
  json j;
  j["rbar"] = rat(d.rbar);
  j["lbar"] = d.lbar;
  j["epsilon"] = rat(d.epsilon);
  j["r"] = rat(d.r);
  j["delta"] = rat(d.delta);
  const std::vector<std::string> base(names.begin(), names.end() - 1);
  j["h"] = d.h.text(base);
  j["g_exponent"] = rat(d.g_exponent);
  j["g"] = d.g_text(base);
  return j;
}

json sliver(const Sliver& s)
{
  json j;
  j["epsilon"] = rat(s.epsilon);
  json box = json::array();
  for (const auto& iv : s.box) box.push_back({rat(iv.lo), rat(iv.hi)});
  j["box"] = box;
  json delta = json::array();
  for (const auto& q : s.delta) delta.push_back(rat(q));
  j["delta"] = delta;
  j["history"] = s.history;
  return j;
}

json error(const Error& e)
{
  json j;
  j["kind"] = error_kind_name(e.kind());
  j["message"] = message_of(e);
  if (const auto* se = dynamic_cast<const SyntaxError*>(&e)) {
    j["line"] = se->line();
    j["column"] = se->column();
  }
  return j;
}

int exit_code(ErrorKind k)
{
  switch (k) {
    case ErrorKind::SyntaxError: return 2;
    case ErrorKind::FragmentEscape:
    case ErrorKind::BoundUnitUnsupported:
    case ErrorKind::UnitCertificateViolated: return 3;
    case ErrorKind::NotIntegrable:
    case ErrorKind::NoDecay:
    case ErrorKind::SingularityTooStrong: return 4;
    case ErrorKind::DomainError: return 1;
    default: return 5;
  }
}

}  // namespace cf::report
