#pragma once

// Small builders shared by the unit tests.

#include "cf/cells.hpp"
#include "cf/expr.hpp"
#include "cf/frontend.hpp"
#include "cf/prepare.hpp"

#include <string>
#include <vector>

namespace cft {

using namespace cf;

inline Rat R(long n, long d = 1) { return make_rat(n, d); }

/// Source cell of "1 on <text>".
inline Cell source(const std::string& text) { return source_cell(parse_source("1 on " + text)); }

/// Normalized form of a cell that is already inside the unit box.
inline Cell ncell(const std::string& text) { return normalize_cell(source(text)).cell; }

/// Expression over the given names, lowered without a cell.
inline CExpr ex(const std::string& text, const std::vector<std::string>& names)
{
  return normalize(lower_plain(parse_expr(text, names), static_cast<int>(names.size())));
}

inline std::string str(const CExpr& e, const std::vector<std::string>& names) { return to_string(e, names); }

inline ExpVec ev(std::initializer_list<Rat> xs) { return ExpVec(xs); }

}  // namespace cft
