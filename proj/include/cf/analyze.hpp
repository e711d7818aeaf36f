#pragma once

#include "cf/cells.hpp"
#include "cf/expr.hpp"
#include "cf/prepare.hpp"
#include "cf/sliver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cf {

enum class Hypothesis { Dense, All };

/// Fiber integrability of one term in the last variable of a normalized cell:
/// a lower bound 0 needs exponent > -1 there. Jacobians are the caller's.
bool term_integrable_last(const Term& t, const Cell& c);

struct DominanceReport {
  Rat rbar;
  int lbar = 0;
  int lbar_prime = 0;
  std::vector<int> I1, I2, I3, I4;
  Term W;
  Sliver sliver;
  Rat margin;
  std::vector<Rat> probe_point;  // point of the box where the leading polynomial was evaluated
  double leading_value = 0;      // that polynomial's value
};

/// Leading-term bookkeeping for a prepared sum on a normalized cell whose
/// variables are all undetermined.
DominanceReport dominance(const CExpr& e, const Cell& c);

struct SumVerdict {
  bool integrable = true;
  std::vector<bool> per_term;
  std::optional<DominanceReport> report;
  std::string note;
};

SumVerdict sum_integrable_last(const CExpr& e, const Cell& c, Hypothesis h = Hypothesis::Dense);

struct IntegrableLocus {
  std::vector<Cell> kept;
  std::vector<Cell> discarded;
  std::vector<std::string> assumptions;
};

/// Keeps the pieces fat in the last source variable whose fiber integral of
/// expr * jacobian converges.
IntegrableLocus integrable_locus(const std::vector<PreparedPiece>& pieces);

/// max{1, sum_i coeff_i x^exps_i prod_j Lplus(x_j)^lplus_ij * factor_i},
/// Lplus(t) = 1/t on (0, 1], t on [1, inf).
struct Majorant {
  struct Piece {
    Rat coeff;
    ExpVec exps;
    std::vector<int> lplus;
    double factor = 1;  // bounds for logs of constants and of units
  };
  int nvars = 0;
  std::vector<Piece> pieces;

  double eval(const std::vector<double>& x) const;
  std::string text(const std::vector<std::string>& names) const;
};

/// Pointwise |e| <= h. Unit factors use their certified upper bounds.
Majorant subanalytic_bound(const CExpr& e);
/// Same, for a sum whose terms are read with the last variable dropped.
Majorant subanalytic_bound_base(const CExpr& e, int drop);

struct DecayResult {
  Rat rbar;
  int lbar = 0;
  Rat epsilon;      // rbar / (2 lbar + 2)
  Rat r;            // (rbar - epsilon lbar) / 2
  Rat delta;        // the last variable stays below delta
  Majorant h;       // over the base
  Rat g_exponent;   // g = min{delta, h^g_exponent}

  /// Threshold in the last normalized variable at a base point.
  double threshold(const std::vector<double>& base) const;
  std::string g_text(const std::vector<std::string>& names) const;
};

/// Decay in the last variable toward 0 on a normalized cell: |e| <= y^r for
/// y < g(base). In source coordinates with y = 1/x this reads |f| <= x^-r.
DecayResult decay_rate(const CExpr& e, const Cell& c);

}  // namespace cf
