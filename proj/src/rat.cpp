#include "cf/rat.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace cf {

Rat make_rat(long num, long den)
{
  if (den == 0) throw std::invalid_argument("zero denominator");
  Rat q(num, den);
  q.canonicalize();
  return q;
}

bool is_integer(const Rat& q) { return q.get_den() == 1; }

long to_long(const Rat& q)
{
  if (!is_integer(q) || !q.get_num().fits_slong_p())
    throw std::out_of_range("rational is not a machine integer: " + to_string(q));
  return q.get_num().get_si();
}

double to_double(const Rat& q) { return q.get_d(); }

std::string to_string(const Rat& q)
{
  if (is_integer(q)) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::optional<Rat> parse_rat(std::string_view text)
{
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (text[0] == '-' || text[0] == '+') {
    neg = text[0] == '-';
    ++i;
  }
  auto digits = [&](std::size_t from, std::size_t& to) {
    to = from;
    while (to < text.size() && std::isdigit(static_cast<unsigned char>(text[to]))) ++to;
    return to > from;
  };
  std::size_t end = 0;
  if (!digits(i, end)) return std::nullopt;
  mpz_class num(std::string(text.substr(i, end - i)));
  mpz_class den(1);
  if (end < text.size()) {
    if (text[end] != '/') return std::nullopt;
    std::size_t end2 = 0;
    if (!digits(end + 1, end2) || end2 != text.size()) return std::nullopt;
    den = mpz_class(std::string(text.substr(end + 1, end2 - end - 1)));
    if (den == 0) return std::nullopt;
  }
  Rat q(neg ? mpz_class(-num) : num, den);
  q.canonicalize();
  return q;
}

Rat pow_int(const Rat& base, long e)
{
  if (e < 0) {
    if (base == 0) throw std::domain_error("zero to a negative power");
    return pow_int(Rat(1) / base, -e);
  }
  mpz_class n, d;
  mpz_pow_ui(n.get_mpz_t(), base.get_num().get_mpz_t(), static_cast<unsigned long>(e));
  mpz_pow_ui(d.get_mpz_t(), base.get_den().get_mpz_t(), static_cast<unsigned long>(e));
  Rat r(n, d);
  r.canonicalize();
  return r;
}

namespace {

std::optional<mpz_class> exact_root(const mpz_class& x, unsigned long k)
{
  if (x < 0) return std::nullopt;
  mpz_class r;
  if (mpz_root(r.get_mpz_t(), x.get_mpz_t(), k) == 0) return std::nullopt;
  return r;
}

}  // namespace

std::optional<Rat> exact_pow(const Rat& base, const Rat& e)
{
  if (is_integer(e)) {
    if (!e.get_num().fits_slong_p()) return std::nullopt;
    if (base == 0 && e < 0) return std::nullopt;
    return pow_int(base, e.get_num().get_si());
  }
  if (base < 0) return std::nullopt;
  if (base == 0) return e > 0 ? std::optional<Rat>(Rat(0)) : std::nullopt;
  if (!e.get_den().fits_ulong_p() || !e.get_num().fits_slong_p()) return std::nullopt;
  const unsigned long k = e.get_den().get_ui();
  auto n = exact_root(base.get_num(), k);
  auto d = exact_root(base.get_den(), k);
  if (!n || !d) return std::nullopt;
  Rat root(*n, *d);
  root.canonicalize();
  return pow_int(root, e.get_num().get_si());
}

std::pair<Rat, Rat> pow_enclosure(const Rat& base, const Rat& e)
{
  if (auto exact = exact_pow(base, e)) return {*exact, *exact};
  if (base <= 0) throw std::domain_error("pow_enclosure needs a positive base");
  const double v = std::pow(to_double(base), to_double(e));
  const double slack = 1e-12 * std::fabs(v) + std::numeric_limits<double>::denorm_min();
  return {Rat(v - slack), Rat(v + slack)};
}

std::pair<Rat, Rat> log_enclosure(const Rat& q)
{
  if (q <= 0) throw std::domain_error("log of a non-positive rational");
  if (q == 1) return {Rat(0), Rat(0)};
  const double v = std::log(to_double(q));
  const double slack = 1e-12 * std::fabs(v) + 1e-300;
  return {Rat(v - slack), Rat(v + slack)};
}

mpz_class lcm_of_denominators(const std::vector<Rat>& values)
{
  mpz_class l(1);
  for (const auto& v : values) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den().get_mpz_t());
  return l;
}

std::vector<std::pair<mpz_class, long>> factor_rat(const Rat& q)
{
  if (q == 0) throw std::domain_error("factor_rat(0)");
  std::map<mpz_class, long> acc;
  auto factor = [&](mpz_class x, long sgn) {
    if (x < 0) x = -x;
    for (unsigned long p = 2; p <= 1000000 && mpz_class(p) * p <= x; ++p) {
      while (mpz_divisible_ui_p(x.get_mpz_t(), p)) {
        acc[mpz_class(p)] += sgn;
        x /= p;
      }
    }
    if (x > 1) acc[x] += sgn;
  };
  factor(q.get_num(), 1);
  factor(q.get_den(), -1);
  std::vector<std::pair<mpz_class, long>> out;
  for (auto& [p, k] : acc)
    if (k != 0) out.emplace_back(p, k);
  return out;
}

Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

int sign(const Rat& q) { return sgn(q); }

}  // namespace cf
