#pragma once

#include "cf/cells.hpp"
#include "cf/expr.hpp"
#include "cf/frontend.hpp"

#include <optional>
#include <vector>

namespace cf {

/// Thresholds for comparing two centers; any 1/2 < a < 1 < b < 1 + a works.
inline const Rat kCenterA{3, 4};
inline const Rat kCenterB{3, 2};

enum class CenterCase {
  NearFirst,   // |y - t1| < a|t1 - t2|:  y - t2 = (t1 - t2) [1 + (y - t1)/(t1 - t2)]
  NearSecond,  // |y - t2| < a|t1 - t2|:  y - t1 = (t2 - t1) [1 + (y - t2)/(t2 - t1)]
  Far,         // otherwise:              y - t2 = (y - t1) [1 + (t1 - t2)/(y - t1)]
};

/// One open piece of the fiber with the bracket's certified range.
struct CenterPiece {
  std::optional<Rat> lo;  // nullopt = -inf
  std::optional<Rat> hi;  // nullopt = +inf
  CenterCase kase;
  Rat bracket_lo;
  Rat bracket_hi;
};

/// Splits the constant fiber of the last variable of c. The closures of the
/// pieces cover the fiber.
std::vector<CenterPiece> compare_centers(const Rat& t1, const Rat& t2, const Cell& c);

/// Moves the exponent and log power of a determined variable onto its lower
/// bound: y_d^r = (y^b)^r (y_d / y^b)^r, the ratio becoming a pure monomial
/// unit. A log power expands, hence the sum.
CExpr absorb_determined(const Term& t, const Cell& c, int pos);
inline CExpr absorb_determined(const Term& t, const Cell& c) { return absorb_determined(t, c, c.size() - 1); }

struct Recentered {
  Cell cell;
  CExpr shift;  // new last coordinate = old - shift
};

/// Translates the last variable by its lower bound so the new lower bound is 0.
Recentered recenter_case2(const Cell& c);

struct PreparedPiece {
  NormalizedCell nc;
  CExpr expr;               // the input on nc.cell, without the Jacobian
  CExpr terms;              // expr with determined exponents absorbed
  std::vector<int> J;       // undetermined positions of nc.cell
};

/// Splits the source cell at the shift points of the expression, normalizes
/// every piece and rewrites the expression on it.
std::vector<PreparedPiece> prepare(const SourceForm& s);
std::vector<PreparedPiece> prepare(const Ast& e, const Cell& c);
std::vector<PreparedPiece> prepare_expr(const CExpr& e, const Cell& c);

/// absorb_determined at every determined position, last first.
CExpr absorb_all(const CExpr& e, const Cell& cell);
/// expr * jacobian with determined exponents absorbed.
CExpr fiber_integrand(const PreparedPiece& p);

/// Structural check: support in J and distinct signatures.
bool admissible(const PreparedPiece& p);

}  // namespace cf
