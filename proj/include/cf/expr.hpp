#pragma once

#include "cf/errors.hpp"
#include "cf/rat.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cf {

/// One exponent per variable position. Zero entries are stored explicitly.
using ExpVec = std::vector<Rat>;

ExpVec zero_exps(int n);
bool all_zero(const ExpVec& e);
bool all_nonneg(const ExpVec& e);
ExpVec exp_add(const ExpVec& a, const ExpVec& b);
ExpVec exp_sub(const ExpVec& a, const ExpVec& b);
ExpVec exp_scale(const ExpVec& a, const Rat& k);
std::vector<int> support(const ExpVec& e);

/// c * y^exps inside a unit, with a certified range [lo, hi] of the bare
/// monomial y^exps on the cell the unit was built for.
struct UnitSummand {
  Rat coeff;
  ExpVec exps;
  Rat lo;
  Rat hi;
};

/// Positive polynomial unit: constant + sum of summands, certified positive by
/// constant + sum(min(coeff*lo, coeff*hi)) > 0. Canonical scaling makes the
/// constant 1 (or -1 when the summands carry the sign), or, for constant 0,
/// the first summand coefficient 1.
class PolyUnit {
 public:
  PolyUnit() = default;

  const Rat& constant() const { return c_; }
  const std::vector<UnitSummand>& summands() const { return s_; }
  bool trivial() const { return s_.empty(); }
  bool pure_monomial() const { return c_ == 0 && s_.size() == 1; }

  Rat lower_bound() const;
  Rat upper_bound() const;

  /// True when any summand involves variable `pos`.
  bool depends_on(int pos) const;

 private:
  friend struct UnitBuilder;
  Rat c_{1};
  std::vector<UnitSummand> s_;
};

int compare(const PolyUnit& a, const PolyUnit& b);
inline bool operator==(const PolyUnit& a, const PolyUnit& b) { return compare(a, b) == 0; }
inline bool operator<(const PolyUnit& a, const PolyUnit& b) { return compare(a, b) < 0; }

enum class UnitStatus { Ok, Zero, Uncertified };

/// value = scale * unit
struct ScaledUnit {
  Rat scale;
  PolyUnit unit;
};

UnitStatus make_unit(Rat constant, std::vector<UnitSummand> summands, ScaledUnit& out);
UnitStatus unit_mul(const PolyUnit& a, const PolyUnit& b, ScaledUnit& out);
UnitStatus unit_lincomb(const Rat& a, const PolyUnit& u, const Rat& b, const PolyUnit& v,
                        ScaledUnit& out);
/// Integer powers of any unit (negative only for pure monomials), rational
/// powers of pure monomial units.
UnitStatus unit_pow(const PolyUnit& u, const Rat& e, ScaledUnit& out);

/// Pure-monomial unit y^exps with range [lo, hi], lo > 0.
PolyUnit monomial_unit(const ExpVec& exps, const Rat& lo, const Rat& hi);

struct LogAtom {
  enum class Kind { Var, Const, Unit };
  Kind kind = Kind::Const;
  int pos = -1;     // Var: log|y_pos - center|, center != 0
  Rat center;
  mpz_class prime;  // Const: log(prime)
  PolyUnit unit;    // Unit: log(unit)

  static LogAtom var(int pos, const Rat& center);
  static LogAtom constant(const mpz_class& p);
  static LogAtom of_unit(const PolyUnit& u);
};

int compare(const LogAtom& a, const LogAtom& b);
inline bool operator<(const LogAtom& a, const LogAtom& b) { return compare(a, b) < 0; }
inline bool operator==(const LogAtom& a, const LogAtom& b) { return compare(a, b) == 0; }

/// coeff * prod |y_j|^exps_j (log|y_j|)^logs_j * prod extras * unit
struct Term {
  Rat coeff{1};
  ExpVec exps;
  std::vector<int> logs;
  std::map<LogAtom, int> extras;
  PolyUnit unit;

  int nvars() const { return static_cast<int>(exps.size()); }
};

Term make_term(int n, const Rat& coeff = 1);
/// Ordering on (exps, logs, extras); coefficient and unit are ignored.
int compare_signature(const Term& a, const Term& b);

struct CExpr {
  int nvars = 0;
  std::vector<Term> terms;
};

CExpr cexpr_const(int n, const Rat& q);
CExpr cexpr_var(int n, int pos);                  // y_pos
CExpr cexpr_monomial(int n, const Rat& q, const ExpVec& exps);
CExpr cexpr_logvar(int n, int pos);               // log y_pos
CExpr cexpr_term(const Term& t);
/// log|q| for rational q != 0, split over prime logarithms.
CExpr cexpr_log_const(int n, const Rat& q);

CExpr add(const CExpr& a, const CExpr& b);
CExpr sub(const CExpr& a, const CExpr& b);
CExpr neg(const CExpr& a);
CExpr scale(const CExpr& a, const Rat& k);
CExpr mul(const CExpr& a, const CExpr& b);
CExpr mul_term(const Term& a, const Term& b);
CExpr pow(const CExpr& a, unsigned k);

/// Multiplies every unit out into plain terms (trivial units only).
CExpr expand_units(const CExpr& e);
CExpr expand_unit(const Term& t);

CExpr normalize(const CExpr& e);
bool is_zero(const CExpr& e);
bool is_normalized(const CExpr& e);

CExpr differentiate(const Term& t, int pos);
CExpr differentiate(const CExpr& e, int pos);

bool has_log_units(const CExpr& e);
bool log_free(const CExpr& e);  // no logs of any kind
bool depends_on(const Term& t, int pos);
bool depends_on(const CExpr& e, int pos);

/// Changes the ambient variable count. Dropped positions must be unused.
CExpr resize(const CExpr& e, int n);
Term resize(const Term& t, int n);
PolyUnit resize(const PolyUnit& u, int n);
LogAtom resize(const LogAtom& a, int n);

/// Sign-aware power of a rational: integer exponents keep the sign, others
/// act on |q|. nullopt when irrational.
std::optional<Rat> signed_pow(const Rat& q, const Rat& e);

}  // namespace cf
