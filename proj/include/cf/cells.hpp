#pragma once

#include "cf/expr.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cf {

/// A cell bound. Finite values are log-free expressions in earlier variables
/// of the owning cell; in a normalized cell they are 0 or a single positive
/// monomial times a unit.
struct Bound {
  enum class Kind { NegInf, Finite, PosInf };
  Kind kind = Kind::Finite;
  CExpr value;

  static Bound zero(int n);
  static Bound constant(int n, const Rat& q);
  static Bound monomial(int n, const Rat& q, const ExpVec& exps, const PolyUnit& unit = {});
  static Bound pos_inf();
  static Bound neg_inf();

  bool finite() const { return kind == Kind::Finite; }
  bool is_zero() const { return finite() && value.terms.empty(); }
  bool is_monomial() const;
  const Term& term() const;  // requires is_monomial()
  std::optional<Rat> as_constant() const;
};

struct VarSpec {
  std::string name;
  bool fat = true;
  Rat center{0};
  int eps = 0;   // 0 = determined by normalize_cell
  int zeta = 0;
  Bound lower;   // for a thin variable: its value
  Bound upper;
};

struct Cell {
  std::vector<VarSpec> vars;

  int size() const { return static_cast<int>(vars.size()); }
  int dim() const;
  std::vector<int> fat_indices() const;
  std::vector<std::string> names() const;
  /// Projection onto the first k variables.
  Cell prefix(int k) const;
  /// Fat only, centers 0, orientation (1, 1), lower 0 or monomial, upper monomial.
  bool normalized() const;
};

// -------------------------------------------------------------- certificates

/// Certified [lo, hi] for the monomial y^exps on a normalized (possibly
/// partial) cell. nullopt when unbounded above.
std::optional<std::pair<Rat, Rat>> monomial_range(const Cell& c, const ExpVec& exps);

/// Treats a log-free expression as scale * unit on the cell when the unit
/// certificate holds.
std::optional<ScaledUnit> certify_unit(const CExpr& e, const Cell& c);

/// e = coeff * y^exps * unit, found by trying each term as the leading one.
struct Factored {
  Rat coeff;
  ExpVec exps;
  PolyUnit unit;
};
std::optional<Factored> factor_mono_unit(const CExpr& e, const Cell& c);

/// Signed value range of a factored expression; a missing end is infinite.
struct ExtRange {
  std::optional<Rat> lo;
  std::optional<Rat> hi;
};
ExtRange value_range(const Factored& f, const Cell& c);

// -------------------------------------------------------------- composition

/// |img|^r as an expression on `target` (sign kept for integer r).
CExpr pow_image(const CExpr& img, const Rat& r, const Cell& target);
/// log|arg| expanded into prime logs, variable logs and a log-of-unit atom.
CExpr log_abs(const CExpr& arg, const Cell& target);
/// Pull-back of e along y_i = images[i], landing on `target`.
CExpr compose(const CExpr& e, const std::vector<CExpr>& images, const Cell& target);
CExpr unit_as_cexpr(const PolyUnit& u, int n);

/// Exact evaluation of a log-free expression at a rational point, when every
/// power is rational.
std::optional<Rat> eval_exact(const CExpr& e, const std::vector<Rat>& point);

// -------------------------------------------------------------- normalization

struct NormalizedCell {
  Cell source;                   // orientation filled in
  Cell cell;                     // over (0,1)^d, centers 0
  std::vector<CExpr> G;          // x_i as expressions in the new variables
  CExpr jacobian;                // |det DG|
  std::vector<int> new_index;    // source position -> new position, -1 if thin
};

NormalizedCell normalize_cell(const Cell& c);
std::optional<std::vector<Rat>> apply_G(const NormalizedCell& nc, const std::vector<Rat>& y);
std::vector<Rat> apply_F(const NormalizedCell& nc, const std::vector<Rat>& x);

struct AsymClass {
  std::vector<bool> determined;   // per position
  std::vector<bool> constrained;
};
AsymClass classify(const Cell& c);

struct HStep {
  int d;
  Rat R;
};

struct HTransform {
  Cell cell;                     // every variable undetermined
  std::vector<CExpr> images;     // y_i in terms of z
  std::vector<HStep> steps;
};

HTransform transform_H(const Cell& c);

/// Identity images for a cell of n variables.
std::vector<CExpr> identity_images(int n);

}  // namespace cf
