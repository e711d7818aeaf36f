#include "support.hpp"

#include "cf/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cft;

namespace {

const std::vector<std::string> Y1{"y1"};
const std::vector<std::string> Y2{"y1", "y2"};

double at(const CExpr& e, std::vector<double> p) { return oracle::eval(e, p); }

std::vector<Rat> rat_point(const Cell& c, std::mt19937_64& rng)
{
  // Rational interior point of a normalized cell: sample in floating point,
  // then round to a dyadic and keep it only if it is strictly inside.
  for (;;) {
    auto p = oracle::sample_point(c, rng, 0.05);
    std::vector<Rat> q;
    for (double v : p) q.push_back(Rat(std::round(v * 65536.0) / 65536.0));
    std::vector<double> back;
    for (const auto& r : q) back.push_back(to_double(r));
    if (oracle::in_cell(c, back, 1e-9)) return q;
  }
}

}  // namespace

TEST_CASE("normalize_cell: unbounded fiber becomes a reciprocal")
{
  NormalizedCell nc = normalize_cell(source("{2 < x1 < inf}"));
  REQUIRE(nc.cell.normalized());
  CHECK(nc.source.vars[0].zeta == -1);
  CHECK(nc.cell.vars[0].lower.is_zero());
  CHECK(nc.cell.vars[0].upper.as_constant() == R(1, 2));
  CHECK(str(nc.G[0], Y1) == str(ex("y1^(-1)", Y1), Y1));
  CHECK(str(nc.jacobian, Y1) == str(ex("y1^(-2)", Y1), Y1));
}

TEST_CASE("normalize_cell: unit interval is the identity")
{
  NormalizedCell nc = normalize_cell(source("{0 < x1 < 1}"));
  CHECK(nc.cell.vars[0].upper.as_constant() == R(1));
  CHECK(str(nc.G[0], Y1) == "y1");
  CHECK(str(nc.jacobian, Y1) == "1");
}

TEST_CASE("normalize_cell: translated center")
{
  NormalizedCell nc = normalize_cell(source("{3 < x1 < 4 center 3}"));
  CHECK(nc.cell.vars[0].upper.as_constant() == R(1));
  CHECK(str(nc.G[0], Y1) == str(ex("y1 + 3", Y1), Y1));
  CHECK(apply_G(nc, {R(0)}).value()[0] == 3);
  CHECK(apply_G(nc, {R(1)}).value()[0] == 4);
  CHECK(apply_F(nc, {R(7, 2)})[0] == R(1, 2));
}

TEST_CASE("normalize_cell: orientation errors")
{
  // a negative fiber is mirrored, not rejected
  NormalizedCell nc = normalize_cell(source("{-1 < x1 < 0}"));
  CHECK(nc.source.vars[0].eps == -1);
  // a fiber around its center cannot be oriented
  CHECK_THROWS_AS(normalize_cell(source("{-1 < x1 < 1}")), Error);
}

TEST_CASE("normalize_cell: bounds that differ only by a unit")
{
  // 1 + x1 > 1 strictly on the open cell, though its certified range starts at 1
  CHECK_NOTHROW(normalize_cell(source("{0 < x1 < 1/2, x1/2 < x2 < x1*(1 + x1)/2}")));
  CHECK_THROWS_AS(normalize_cell(source("{0 < x1 < 1/2, x1/2 < x2 < x1/2}")), Error);
}

TEST_CASE("round trip F(G(p)) = p on normalized cells")
{
  std::mt19937_64 rng(5);
  for (const char* text : {"{2 < x1 < inf, 0 < x2 < x1^(-2)}", "{0 < x1 < 1, 1 < x2 < 2 center 1}",
                           "{1/2 < x1 < 1, 0 < x2 < x1^3}"}) {
    NormalizedCell nc = normalize_cell(source(text));
    for (int k = 0; k < 100; ++k) {
      auto p = rat_point(nc.cell, rng);
      auto x = apply_G(nc, p);
      REQUIRE(x);
      CHECK(apply_F(nc, *x) == p);
    }
  }
}

TEST_CASE("jacobian matches finite differences of G")
{
  NormalizedCell nc = normalize_cell(source("{2 < x1 < inf, 0 < x2 < x1^(-2)}"));
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    auto p = oracle::sample_point(nc.cell, rng, 0.1);
    // |det DG| for a triangular map is the product of diagonal derivatives
    double det = 1;
    for (int i = 0; i < 2; ++i) {
      double h = 1e-6 * p[i];
      auto q1 = p, q2 = p;
      q1[i] += h;
      q2[i] -= h;
      det *= (at(nc.G[i], q1) - at(nc.G[i], q2)) / (2 * h);
    }
    CHECK(at(nc.jacobian, p) == doctest::Approx(std::abs(det)).epsilon(1e-6));
  }
}

TEST_CASE("classify")
{
  AsymClass a = classify(ncell("{0 < y1 < 1, y1/2 < y2 < y1}"));
  CHECK(a.determined[1]);
  CHECK(a.constrained[1]);
  AsymClass b = classify(ncell("{0 < y1 < 1, y1^2 < y2 < y1}"));
  CHECK_FALSE(b.determined[1]);
  CHECK(b.constrained[1]);
  AsymClass c = classify(ncell("{0 < y1 < 1, 0 < y2 < y1}"));
  CHECK_FALSE(c.determined[1]);
  CHECK_FALSE(c.constrained[1]);
  // scaling both bounds keeps the verdict
  AsymClass d = classify(ncell("{0 < y1 < 1, y1/4 < y2 < y1/2}"));
  CHECK(d.determined[1]);
}

TEST_CASE("transform_H on a determined variable")
{
  Cell c = ncell("{0 < y1 < 1, y1/2 < y2 < y1}");
  HTransform h = transform_H(c);
  REQUIRE(h.steps.size() == 1);
  CHECK(h.steps[0].d == 1);
  CHECK(h.steps[0].R == R(1, 2));
  CHECK(str(h.images[1], {"z1", "z2"}) == str(ex("z1*z2/2 + z1/2", {"z1", "z2"}), {"z1", "z2"}));
  AsymClass a = classify(h.cell);
  CHECK_FALSE(a.determined[0]);
  CHECK_FALSE(a.determined[1]);
  // endpoints z2 -> 0 and z2 -> 1
  CHECK(eval_exact(h.images[1], {R(1, 3), R(0)}) == R(1, 6));
  CHECK(eval_exact(h.images[1], {R(1, 3), R(1)}) == R(1, 3));
}

TEST_CASE("transform_H when the bounds agree at the origin")
{
  // v - u = y1/2, so the new fiber is (0, y1) rather than (0, 1)
  Cell c = ncell("{0 < y1 < 1/2, y1/2 < y2 < y1*(1 + y1)/2}");
  HTransform h = transform_H(c);
  REQUIRE(h.steps.size() == 1);
  CHECK(h.steps[0].R == R(1, 4));
  CHECK(h.cell.vars[1].lower.is_zero());
  CHECK(h.cell.vars[1].upper.term().exps == ev({1, 0}));
  CHECK(h.cell.vars[1].upper.term().coeff == R(2));
}

TEST_CASE("transform_H is the identity on undetermined cells")
{
  Cell c = ncell("{0 < y1 < 1, y1^2 < y2 < y1}");
  HTransform h = transform_H(c);
  CHECK(h.steps.empty());
  CHECK(to_string(h.cell) == to_string(c));
}

TEST_CASE("transform_H images land in the cell")
{
  std::mt19937_64 rng(13);
  for (const char* text : {"{0 < y1 < 1, y1/2 < y2 < y1}", "{0 < y1 < 1/2, y1/2 < y2 < y1, y1*y2/3 < y3 < y1*y2}",
                           "{0 < y1 < 1/2, y1/2 < y2 < y1*(1 + y1)/2, 0 < y3 < y2}"}) {
    Cell c = ncell(text);
    HTransform h = transform_H(c);
    AsymClass a = classify(h.cell);
    for (bool d : a.determined) CHECK_FALSE(d);
    for (int k = 0; k < 100; ++k) {
      auto z = rat_point(h.cell, rng);
      std::vector<Rat> y;
      for (const auto& img : h.images) y.push_back(eval_exact(img, z).value());
      // exact containment: lower < y_i < upper
      for (int i = 0; i < c.size(); ++i) {
        std::vector<Rat> pre(y.begin(), y.begin() + i);
        pre.resize(c.size(), Rat(0));
        Rat lo = c.vars[i].lower.is_zero() ? Rat(0) : eval_exact(c.vars[i].lower.value, pre).value();
        Rat hi = eval_exact(c.vars[i].upper.value, pre).value();
        CHECK(lo < y[i]);
        CHECK(y[i] < hi);
      }
    }
  }
}

TEST_CASE("compose with G")
{
  NormalizedCell nc = normalize_cell(source("{2 < x1 < inf}"));
  CHECK(str(compose(ex("x1^(-1)", {"x1"}), nc.G, nc.cell), Y1) == "y1");
  CHECK(str(compose(ex("log(x1)", {"x1"}), nc.G, nc.cell), Y1) == str(ex("-log(y1)", Y1), Y1));
}

TEST_CASE("compose with H")
{
  Cell c = ncell("{0 < y1 < 1, y1/2 < y2 < y1}");
  HTransform h = transform_H(c);
  const std::vector<std::string> Z{"z1", "z2"};
  CExpr lin = compose(ex("y2", Y2), h.images, h.cell);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    auto z = oracle::sample_point(h.cell, rng);
    CHECK(at(lin, z) == doctest::Approx(z[0] * (z[1] / 2 + 0.5)).epsilon(1e-12));
  }
  // a fractional power of a non-monomial unit leaves the fragment
  CHECK_THROWS_AS(compose(ex("y2^(1/2)", Y2), h.images, h.cell), Error);
}

TEST_CASE("log of a monomial times a unit expands")
{
  Cell c = ncell("{0 < y1 < 1}");
  CExpr l = normalize(log_abs(ex("4*y1^(1/2)*(1 + y1/2)", Y1), c));
  int var_logs = 0, const_logs = 0, unit_logs = 0;
  for (const auto& t : l.terms) {
    if (t.logs[0] > 0) ++var_logs;
    for (const auto& [a, k] : t.extras) {
      (void)k;
      if (a.kind == LogAtom::Kind::Const) ++const_logs;
      if (a.kind == LogAtom::Kind::Unit) ++unit_logs;
    }
  }
  CHECK(var_logs == 1);
  CHECK(const_logs == 1);
  CHECK(unit_logs == 1);
  CHECK(at(l, {0.25}) == doctest::Approx(std::log(4 * 0.5 * 1.125)).epsilon(1e-12));
}

TEST_CASE("monomial ranges")
{
  Cell c = ncell("{0 < y1 < 1/2, y1^2 < y2 < y1}");
  auto r = monomial_range(c, ev({R(1), R(0)}));
  REQUIRE(r);
  CHECK(r->first == 0);
  CHECK(r->second == R(1, 2));
  CHECK(!monomial_range(c, ev({R(-1), R(0)})));
}
