#pragma once

#include <string>

#include "cbn/generate.hpp"
#include "cbn/inference.hpp"
#include "cbn/model.hpp"

namespace cbn::testing {

inline Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline std::string data_path(const std::string& file) { return std::string(CBN_DATA_DIR) + "/" + file; }

/// Bundled model with its marginal definitions generated.
inline ConstrainedBN bundled(const std::string& file, const InferenceOptions& options = {}) {
  ConstrainedBN b = load_model_file(data_path(file));
  ensure_marginal_definitions(b, options);
  return b;
}

/// Small random model with its suggested marginal defined.
inline ConstrainedBN small_random_model(std::uint64_t seed, std::size_t x_vars = 2) {
  GeneratedModel g = generate_random(seed, {.nodes = 1 + seed % 4, .x_vars = x_vars, .min_states = 1, .max_states = 3, .max_parents = 2});
  ensure_marginal_definitions(g.model);
  return g.model;
}

}  // namespace cbn::testing
