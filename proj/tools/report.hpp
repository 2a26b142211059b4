#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbn/model.hpp"
#include "cbn/optimize.hpp"
#include "cbn/solver.hpp"

namespace cbn::cli {

using Json = nlohmann::ordered_json;

/// FNV-1a 64 of the canonical model text, as 16 hex digits.
std::string model_hash(const ConstrainedBN& b);

/// Exact text plus a 15-digit decimal rendering.
Json rational_json(const Rational& value);

/// Values by variable name and the exact residual; never omits the residual.
Json witness_json(const Witness& w);

/// Envelope with a fixed key order. Optional parts are omitted when unset.
struct Report {
  std::string command;
  std::string model_hash;
  Json inputs = Json::object();
  std::string outcome;
  std::optional<Witness> witness;
  Json stats = Json::object();
  std::vector<std::string> warnings;
  Json result = Json::object();  // command-specific payload
};

Json to_json(const Report& r);

/// Two-space indented JSON with a trailing newline.
std::string render(const Report& r);

/// Interval payload; timing is dropped when `deterministic`.
Json interval_json(const IntervalResult& r, bool deterministic);

}  // namespace cbn::cli
