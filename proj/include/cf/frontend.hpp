#pragma once

#include "cf/cells.hpp"
#include "cf/expr.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cf {

/// Source-level expression tree. Sums and products are n-ary and flattened;
/// numeric factors adjacent in a product are folded while parsing.
struct Ast {
  enum class Kind { Num, Var, Add, Mul, Neg, Pow, Log };
  Kind kind = Kind::Num;
  Rat num;              // Num value, Pow exponent
  int var = -1;         // Var index
  std::string name;     // Var name as written
  std::vector<Ast> kids;
  int line = 0;
  int column = 0;

  static Ast number(const Rat& q);
  static Ast variable(int index, std::string name);
};

bool operator==(const Ast& a, const Ast& b);

struct SourceChain {
  std::string name;
  bool thin = false;
  bool lower_inf = false;  // -inf
  bool upper_inf = false;  // inf
  Ast lower;               // thin: the value
  Ast upper;
  Rat center{0};
};

/// `EXPR on {chains}`; variables are declared by their order in the cell.
struct SourceForm {
  Ast expr;
  std::vector<SourceChain> chains;

  std::vector<std::string> names() const;
};

SourceForm parse_source(std::string_view text);
/// Expression over already declared variables.
Ast parse_expr(std::string_view text, const std::vector<std::string>& names);

std::string print_ast(const Ast& a, const std::vector<std::string>& names);
std::string print_source(const SourceForm& s);

/// Cell in source coordinates; bounds lowered to log-free expressions.
Cell source_cell(const SourceForm& s);

/// Lowers the tree with x_i = images[i] onto `target`.
CExpr lower(const Ast& a, const std::vector<CExpr>& images, const Cell& target);
/// Lowers with identity images (exponents on bare variables, no cell needed
/// unless fractional powers of sums or logs of sums occur).
CExpr lower_plain(const Ast& a, int nvars);

/// Canonical text of an exact expression. Terms follow signature order.
std::string to_string(const CExpr& e, const std::vector<std::string>& names);
std::string to_string(const PolyUnit& u, const std::vector<std::string>& names);
std::string to_string(const Cell& c);
std::string to_string(const Bound& b, const std::vector<std::string>& names);

/// Default names y1..yn.
std::vector<std::string> default_names(int n, const std::string& stem = "y");

/// Numeric evaluation of a source tree (log means log|.|, fractional powers
/// act on |.|).
double eval_ast(const Ast& a, const std::vector<double>& point);

}  // namespace cf
