#pragma once

#include "cf/cells.hpp"
#include "cf/expr.hpp"

#include <string>
#include <vector>

namespace cf {

/// constant + sum coeffs[j] * t_{j+2}; the exponent of t_1 in psi(t)^alpha.
struct AffineForm {
  Rat constant;
  std::vector<Rat> coeffs;

  Rat eval(const std::vector<Rat>& t) const;
  double eval(const std::vector<double>& t) const;
};

bool operator==(const AffineForm& a, const AffineForm& b);
AffineForm operator-(const AffineForm& a, const AffineForm& b);

struct Interval {
  Rat lo;
  Rat hi;
};

/// Ranges of t_2 .. t_n.
using Box = std::vector<Interval>;

Rat min_over(const AffineForm& f, const Box& box);
Rat max_over(const AffineForm& f, const Box& box);

/// psi(t) = (t_1, t_1^t_2, ..., t_1^t_n) for t_1 in (0, epsilon), rest in box.
struct Sliver {
  Rat epsilon;
  Box box;
  std::vector<Rat> delta;             // per variable, 0 for the first
  std::vector<std::string> history;   // shrink steps, in order
};

AffineForm pull_exponent(const ExpVec& alpha);

struct Separation {
  int index = 0;
  Rat margin;
  Box box;
};

/// A form that stays below every different form by `margin` on a sub-box.
/// Forms equal to the chosen one are not separated from it.
Separation separate(const std::vector<AffineForm>& forms, const Box& box);

struct DecayShrink {
  Sliver sliver;
  Rat c;
};

/// Shrinks the box so that pull_exponent(beta) >= c > 0 on it.
DecayShrink shrink_for_decay(const ExpVec& beta, const Sliver& s);

/// Sliver inside a normalized cell whose variables are all undetermined.
Sliver build_sliver(const Cell& c);

/// Shrinks the box to a sub-box (same epsilon); the certificates stay valid.
Sliver restrict_box(const Sliver& s, const Box& box, const std::string& why);

/// log psi(t) coordinates: t_j * log t_1.
std::vector<double> sliver_logs(double log_t1, const std::vector<double>& t);

/// Membership of psi(t) in c, decided on logarithms.
bool sliver_point_in_cell(const Cell& c, double log_t1, const std::vector<double>& t);

}  // namespace cf
