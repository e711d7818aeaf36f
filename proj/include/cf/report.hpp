#pragma once

// JSON views of engine results, as emitted by cfcalc --json. Rationals are
// strings ("-3/2"); every expression carries its canonical text.

#include "cf/analyze.hpp"
#include "cf/cells.hpp"
#include "cf/errors.hpp"
#include "cf/expr.hpp"
#include "cf/integrate.hpp"
#include "cf/prepare.hpp"
#include "cf/sliver.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cf::report {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

json rat(const Rat& q);
json exps(const ExpVec& e);

json expr(const CExpr& e, const std::vector<std::string>& names);
json cell(const Cell& c);
json normalized(const NormalizedCell& nc);
json piece(const PreparedPiece& p);
json fubini(const FubiniResult& r);
json dominance(const DominanceReport& d, const std::vector<std::string>& names);
json verdict(const SumVerdict& v, const std::vector<std::string>& names);
json decay(const DecayResult& d, const std::vector<std::string>& names);
json sliver(const Sliver& s);
json error(const Error& e);

/// Exit status for an engine error: 2 parse, 3 fragment escape, 4 not
/// integrable or no decay, 1 bad argument values, 5 otherwise.
int exit_code(ErrorKind k);

}  // namespace cf::report
