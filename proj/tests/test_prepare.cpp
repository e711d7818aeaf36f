#include "support.hpp"

#include "cf/oracle.hpp"
#include "cf/prepare.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cft;

namespace {

const std::vector<std::string> Y1{"y1"};
const std::vector<std::string> Y2{"y1", "y2"};

double at(const CExpr& e, std::vector<double> p) { return oracle::eval(e, p); }

/// Checks value preservation of every piece against the source expression.
void check_pieces(const SourceForm& s, const std::vector<PreparedPiece>& pieces, int samples = 100)
{
  std::mt19937_64 rng(21);
  for (const auto& p : pieces) {
    CHECK(admissible(p));
    CHECK(p.nc.cell.normalized());
    for (int k = 0; k < samples; ++k) {
      auto y = oracle::sample_point(p.nc.cell, rng);
      std::vector<double> x;
      for (const auto& g : p.nc.G) x.push_back(at(g, y));
      double want = eval_ast(s.expr, x);
      CHECK(at(p.expr, y) == doctest::Approx(want).epsilon(1e-10));
      CHECK(at(p.terms, y) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

int count_sigs(const CExpr& e) { return static_cast<int>(normalize(e).terms.size()); }

}  // namespace

TEST_CASE("compare_centers far from both centers")
{
  auto ps = compare_centers(R(1), R(0), source("{2 < y1 < 3}"));
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].kase == CenterCase::Far);
  // bracket 1 + 1/(y - 1) runs over (3/2, 2)
  CHECK(ps[0].bracket_lo == R(3, 2));
  CHECK(ps[0].bracket_hi == R(2));
}

TEST_CASE("compare_centers near the first center")
{
  auto ps = compare_centers(R(1), R(0), source("{9/10 < y1 < 11/10}"));
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].kase == CenterCase::NearFirst);
  CHECK(ps[0].bracket_lo == R(9, 10));
  CHECK(ps[0].bracket_hi == R(11, 10));
}

TEST_CASE("compare_centers rejects equal centers")
{
  try {
    compare_centers(R(1), R(1), source("{2 < y1 < 3}"));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EqualCenters);
  }
}

TEST_CASE("compare_centers pieces cover the fiber")
{
  for (const char* text : {"{-5 < y1 < 5}", "{-inf < y1 < inf}", "{1/3 < y1 < 7/3}", "{0 < y1 < inf}"}) {
    Cell c = source(text);
    auto ps = compare_centers(R(1), R(-1, 2), c);
    REQUIRE(!ps.empty());
    CHECK(ps.front().lo == c.vars[0].lower.as_constant());
    CHECK(ps.back().hi == c.vars[0].upper.as_constant());
    for (std::size_t k = 0; k + 1 < ps.size(); ++k) CHECK(ps[k].hi == ps[k + 1].lo);
    for (const auto& p : ps) CHECK(p.bracket_lo > 0);
  }
}

TEST_CASE("absorb_determined, power one")
{
  Cell c = ncell("{0 < y1 < 1, y1/2 < y2 < y1}");
  CExpr out = absorb_determined(ex("y2", Y2).terms[0], c);
  REQUIRE(out.terms.size() == 1);
  CHECK(out.terms[0].exps[1] == 0);
  CHECK(out.terms[0].exps[0] == 1);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    auto p = oracle::sample_point(c, rng);
    CHECK(at(out, p) == doctest::Approx(p[1]).epsilon(1e-12));
  }
}

TEST_CASE("absorb_determined, identity and squares")
{
  Cell c = ncell("{0 < y1 < 1, y1/2 < y2 < y1}");
  CExpr id = absorb_determined(ex("y1^3", Y2).terms[0], c);
  CHECK(str(id, Y2) == str(ex("y1^3", Y2), Y2));
  CExpr sq = absorb_determined(ex("y2^2", Y2).terms[0], c);
  REQUIRE(sq.terms.size() == 1);
  CHECK(sq.terms[0].exps[0] == 2);
  CHECK(sq.terms[0].exps[1] == 0);
  CHECK(sq.terms[0].coeff * sq.terms[0].unit.lower_bound() >= R(1, 4));
  CHECK(sq.terms[0].coeff * sq.terms[0].unit.upper_bound() <= R(1));
}

TEST_CASE("absorb_determined with a log power")
{
  Cell c = ncell("{0 < y1 < 1, y1/2 < y2 < y1}");
  CExpr out = absorb_determined(ex("y2*log(y2)", Y2).terms[0], c);
  for (const auto& t : out.terms) CHECK(t.logs[1] == 0);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    auto p = oracle::sample_point(c, rng);
    CHECK(at(out, p) == doctest::Approx(p[1] * std::log(p[1])).epsilon(1e-12));
  }
}

TEST_CASE("absorb_determined requires a determined variable")
{
  Cell c = ncell("{0 < y1 < 1, 0 < y2 < y1}");
  try {
    absorb_determined(ex("y2", Y2).terms[0], c);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotDetermined);
  }
}

TEST_CASE("recenter_case2")
{
  Recentered r = recenter_case2(source("{0 < y1 < 1, 1/2 < y2 < 3/4}"));
  CHECK(r.cell.vars[1].lower.is_zero());
  CHECK(r.cell.vars[1].upper.as_constant() == R(1, 4));
  CHECK(r.shift.terms.size() == 1);
  CHECK(eval_exact(r.shift, {R(1, 3), R(0)}) == R(1, 2));

  Recentered s = recenter_case2(source("{0 < y1 < 1, 1/2 < y2 < 1/2 + y1/4}"));
  CHECK(s.cell.vars[1].lower.is_zero());
  CHECK(str(s.cell.vars[1].upper.value, Y2) == str(ex("y1/4", Y2), Y2));
  CHECK_FALSE(classify(normalize_cell(s.cell).cell).constrained[1]);

  try {
    recenter_case2(source("{0 < y1 < 1, 0 < y2 < y1}"));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotCase2);
  }
}

TEST_CASE("prepare: log of a square")
{
  SourceForm s = parse_source("log(x1^2) on {0 < x1 < 1}");
  auto ps = prepare(s);
  REQUIRE(ps.size() == 1);
  REQUIRE(ps[0].terms.terms.size() == 1);
  CHECK(ps[0].terms.terms[0].coeff == 2);
  CHECK(ps[0].terms.terms[0].logs[0] == 1);
  check_pieces(s, ps);
}

TEST_CASE("prepare: binomial expansion of a squared log")
{
  SourceForm s = parse_source("log(x1*x2)^2 on {0 < x1 < 1, 0 < x2 < x1}");
  auto ps = prepare(s);
  REQUIRE(ps.size() == 1);
  CHECK(count_sigs(ps[0].terms) == 3);
  check_pieces(s, ps, 5);
}

TEST_CASE("prepare: constant logs split off")
{
  SourceForm s = parse_source("log(4*x1^(1/2)) on {0 < x1 < 1}");
  auto ps = prepare(s);
  REQUIRE(ps.size() == 1);
  CHECK(count_sigs(ps[0].terms) == 2);
  CHECK(at(ps[0].expr, {0.25}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  check_pieces(s, ps);
}

TEST_CASE("prepare: shifted logs split the fiber")
{
  SourceForm s = parse_source("log(x1 - 1/2)*x1^2*log(x1) on {0 < x1 < 2}");
  auto ps = prepare(s);
  CHECK(ps.size() >= 2);
  check_pieces(s, ps);
}

TEST_CASE("prepare: fractional power of a shifted variable near another center escapes")
{
  // next to 1/2, x1^(-1/3) is a fractional power of 1/2 - y
  SourceForm s = parse_source("log(x1 - 1/2)*x1^(-1/3) on {0 < x1 < 2}");
  try {
    prepare(s);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FragmentEscape);
  }
}

TEST_CASE("prepare: two centers in one variable")
{
  SourceForm s = parse_source("log(x1 - 1)*log(x1) on {1/4 < x1 < 3}");
  auto ps = prepare(s);
  CHECK(ps.size() >= 2);
  check_pieces(s, ps);
}

TEST_CASE("prepare: unbounded fibers keep center 0")
{
  SourceForm s = parse_source("x1^(-2)*log(x1 - 1) on {2 < x1 < inf}");
  auto ps = prepare(s);
  check_pieces(s, ps);
  for (const auto& p : ps) {
    const auto& v = p.nc.source.vars[0];
    if (!v.upper.finite()) CHECK(v.center == 0);
  }
}

TEST_CASE("prepare: support lies in the undetermined set")
{
  SourceForm s = parse_source("x2^(3/2)*log(x2) on {0 < x1 < 1, x1/2 < x2 < x1}");
  auto ps = prepare(s);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].J == std::vector<int>{0});
  check_pieces(s, ps);
}

TEST_CASE("prepare is idempotent on prepared input")
{
  SourceForm s = parse_source("x1^(-1/2)*log(x1)^2 + x1*x2 on {0 < x1 < 1, 0 < x2 < x1}");
  auto ps = prepare(s);
  REQUIRE(ps.size() == 1);
  auto again = prepare_expr(ps[0].terms, ps[0].nc.cell);
  REQUIRE(again.size() == 1);
  CHECK(str(again[0].terms, Y2) == str(ps[0].terms, Y2));
}

TEST_CASE("prepare: sign-changing log argument escapes")
{
  SourceForm s = parse_source("log(x1 + x2 - 1) on {0 < x1 < 1, 0 < x2 < 1}");
  try {
    prepare(s);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FragmentEscape);
  }
}
