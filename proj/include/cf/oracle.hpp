#pragma once

// Floating-point evaluation and quadrature. Used only to check the exact
// engine; nothing in the engine reads these results.

#include "cf/cells.hpp"
#include "cf/expr.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace cf::oracle {

double eval(const CExpr& e, const std::vector<double>& point);
double eval_unit(const PolyUnit& u, const std::vector<double>& point);
double eval_bound(const Bound& b, const std::vector<double>& point);

/// Strict membership, with a relative margin on each bound comparison.
bool in_cell(const Cell& c, const std::vector<double>& point, double margin = 0.0);
/// eval, raising DomainError outside the cell.
double eval_in_cell(const CExpr& e, const Cell& c, const std::vector<double>& point);

/// Uniform point of the cell, sampled variable by variable. Fibers are
/// sampled away from their ends by `inset` (relative).
std::vector<double> sample_point(const Cell& c, std::mt19937_64& rng, double inset = 0.02);

struct QuadResult {
  double value = 0;
  double error = 0;
};

/// Adaptive Gauss-Kronrod on (a, b). When `singular_lower` is set, y = a +
/// (b-a) u^k straightens an integrable power singularity y^r at a, with
/// k (r + 1) >= 2. An infinite b is mapped through y = a + 1/v - 1.
QuadResult integrate_fn(const std::function<double(double)>& f, double a, double b, bool singular_lower = false,
                        double r_min = 0.0);

/// Integral of e over the last variable of c, other variables fixed to
/// `params`. Throws SingularityTooStrong when the lower end is 0 and some term
/// has exponent <= -1 there.
QuadResult quadrature(const CExpr& e, const Cell& c, const std::vector<double>& params);

/// Iterated integral over the last m variables.
QuadResult quadrature_iterated(const CExpr& e, const Cell& c, int m, const std::vector<double>& params);

enum class Verdict { Converged, Diverged, Inconclusive };
enum class Growth { None, Power, LogLinear };

struct ProbeReport {
  Verdict verdict = Verdict::Inconclusive;
  Growth model = Growth::None;
  std::vector<double> partials;   // integrals over (b 2^-k, b), k = 1..40
  double tail_ratio = 0;          // geometric decay rate of the dyadic increments
};

/// Partial integrals toward a lower end at 0; verdict from the decay of the
/// dyadic increments over the last five segments.
ProbeReport divergence_probe(const std::function<double(double)>& f, double b);
ProbeReport divergence_probe(const CExpr& e, const Cell& c, const std::vector<double>& params);

const char* verdict_name(Verdict v);
const char* growth_name(Growth g);

}  // namespace cf::oracle
