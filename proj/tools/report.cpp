#include "report.hpp"

#include <cstdint>
#include <cstdio>

namespace cbn::cli {

std::string model_hash(const ConstrainedBN& b) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : save_model(b)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json rational_json(const Rational& value) {
  return Json{{"exact", to_string(value)}, {"decimal", to_decimal(value, 15)}};
}

Json witness_json(const Witness& w) {
  Json values = Json::object();
  for (const auto& [name, v] : w.values) values[name] = to_string(v);
  return Json{{"values", values}, {"residual", to_string(w.residual)}};
}

Json to_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  j["model_hash"] = r.model_hash;
  j["inputs"] = r.inputs;
  j["outcome"] = r.outcome;
  if (!r.result.empty()) j["result"] = r.result;
  if (r.witness) j["witness"] = witness_json(*r.witness);
  j["stats"] = r.stats;
  j["warnings"] = r.warnings;
  return j;
}

std::string render(const Report& r) { return to_json(r).dump(2) + "\n"; }

Json interval_json(const IntervalResult& r, bool deterministic) {
  Json j;
  j["outcome"] = to_string(r.outcome);
  if (r.outcome == Outcome::Interval || r.outcome == Outcome::ZeroExtremum ||
      (r.outcome == Outcome::Aborted && r.low <= r.high && r.high != r.low)) {
    j["low"] = rational_json(r.low);
    j["high"] = rational_json(r.high);
    j["width"] = rational_json(r.high - r.low);
  }
  if (r.witness_value) j["witness_value"] = rational_json(*r.witness_value);
  if (!r.reason.empty()) j["reason"] = r.reason;
  Json s;
  s["algorithm"] = r.stats.algorithm;
  s["sat_checks"] = r.stats.sat_checks;
  s["dispatch_checks"] = r.stats.dispatch_checks;
  s["assert_checks"] = r.stats.assert_checks;
  s["oracle_calls"] = r.stats.oracle_calls;
  if (r.stats.initial_cache) s["initial_cache"] = rational_json(*r.stats.initial_cache);
  if (r.stats.bound) s["bound"] = *r.stats.bound;
  if (r.stats.counted_bound) s["counted_bound"] = *r.stats.counted_bound;
  if (!deterministic) s["wall_time_ms"] = r.stats.wall_time_ms;
  j["stats"] = s;
  return j;
}

}  // namespace cbn::cli
