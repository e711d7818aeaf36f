#pragma once

#include "cf/cells.hpp"
#include "cf/expr.hpp"
#include "cf/prepare.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cf {

enum class AntiderivativeMethod { Recursion, ClosedForm };

/// A one-variable antiderivative of y^r (log y)^s.
CExpr antiderivative_pow_log(const Rat& r, int s, AntiderivativeMethod method = AntiderivativeMethod::ClosedForm);

/// Integrand in w after clearing exponent denominators:
/// (sum_i laurent[i] w^-i + sum_k analytic[k] w^k) (log w)^s, coefficients
/// over the base variables.
struct SForm {
  int nvars = 0;  // base variables
  int s = 0;
  std::map<int, CExpr> laurent;   // i >= 1
  std::map<int, CExpr> analytic;  // k >= 0
};

/// A fiber end q * x^exps over the base, or 0.
struct BoundSpec {
  bool zero = false;
  Rat coeff;
  ExpVec exps;
};

BoundSpec bound_spec(const Bound& b, int base_n);
/// w = b^(1/p); FragmentEscape when the coefficient has no rational root.
BoundSpec bound_root(const BoundSpec& b, long p);

CExpr integrate_sform(const SForm& sf, const BoundSpec& a, const BoundSpec& b);

// ------------------------------------------------------------ splitting

/// Polynomial in three variables, keyed by exponents.
using Poly3 = std::map<std::array<int, 3>, Rat>;

/// F(X, Y, Z) with Z = D / Y split by i - j for the monomials Y^i Z^j:
/// F = Z^2 leq_minus2(X, D, Z) + Z minus1(X, D) + geq0(X, D, Y).
struct SplitSeries {
  Poly3 leq_minus2;  // keys (X, D, Z)
  Poly3 minus1;      // keys (X, D, 0)
  Poly3 geq0;        // keys (X, D, Y)
};

SplitSeries split(const Poly3& F);

/// Laurent polynomial in (X, D, Y); Y exponents may be negative.
using Laurent3 = std::map<std::array<int, 3>, Rat>;
Laurent3 substitute_ratio(const Poly3& F);   // F(X, Y, D/Y)
Laurent3 reconstruct(const SplitSeries& s);

// ------------------------------------------------------------ changes of variables

struct PowerSubst {
  long p;
};
struct AffineSubst {
  CExpr scale;  // base term, positive
  CExpr shift;  // base expression
};
struct ReciprocalSubst {
  CExpr d;      // base term, positive
};
using Substitution = std::variant<PowerSubst, AffineSubst, ReciprocalSubst>;

/// Rewrites the variable at `pos` and multiplies in |Jacobian|.
CExpr change_of_variables(const Term& t, const Substitution& rule, int pos);
CExpr change_of_variables(const CExpr& e, const Substitution& rule, int pos);

// ------------------------------------------------------------ drivers

/// Integral over the last variable of a normalized cell, as an expression in
/// the remaining variables. Every term must pass the fiber test.
CExpr integrate_last(const CExpr& e, const Cell& c);

struct PieceIntegral {
  Cell source;
  NormalizedCell nc;
  CExpr value;               // over the first nc.cell.size() - integrated fat variables
  int integrated = 0;        // fat variables integrated
  bool measure_zero = false;
};

/// Pieces summed over one base cell, in source coordinates.
struct BaseRegion {
  Cell base;
  CExpr value;
};

struct FubiniResult {
  std::vector<PieceIntegral> pieces;
  std::vector<BaseRegion> regions;  // when no piece moves the base variables
  std::optional<CExpr> total;       // when there is a single region
  std::vector<std::string> names;   // names for regions and total
  std::vector<std::string> assumptions;
};

/// Integrates the last m source variables of every piece.
FubiniResult integrate_fubini(const std::vector<PreparedPiece>& pieces, int m);
FubiniResult integrate_fubini(const SourceForm& s, int m);

}  // namespace cf
