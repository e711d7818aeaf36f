#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cf {

/// Exact arbitrary-precision rational. mpq_class keeps values canonical
/// (reduced, positive denominator) as long as construction goes through
/// make_rat / parse_rat.
using Rat = mpq_class;

Rat make_rat(long num, long den = 1);

bool is_integer(const Rat& q);
long to_long(const Rat& q);  // q must be an integer that fits
double to_double(const Rat& q);
std::string to_string(const Rat& q);

/// Accepts "3", "-1/2", "+7/4". Decimal literals are rejected.
std::optional<Rat> parse_rat(std::string_view text);

Rat pow_int(const Rat& base, long e);

/// base^e when the result is rational. Negative bases are allowed only for
/// integer exponents; otherwise nullopt.
std::optional<Rat> exact_pow(const Rat& base, const Rat& e);

/// Rational enclosure [lo, hi] of base^e for base > 0. Exact when the power is
/// rational, otherwise a double evaluation widened outward.
std::pair<Rat, Rat> pow_enclosure(const Rat& base, const Rat& e);

/// Rational enclosure of log(q) for q > 0.
std::pair<Rat, Rat> log_enclosure(const Rat& q);

mpz_class lcm_of_denominators(const std::vector<Rat>& values);

/// Prime factorization of |q| as (prime, exponent) pairs, negative exponents
/// for the denominator. Cofactors above the trial-division limit are returned
/// as a single factor.
std::vector<std::pair<mpz_class, long>> factor_rat(const Rat& q);

Rat rat_abs(const Rat& q);
int sign(const Rat& q);

}  // namespace cf
