#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "ldboot/extended.hpp"
#include "ldboot/measures.hpp"
#include "ldboot/montecarlo.hpp"
#include "ldboot/rates.hpp"
#include "ldboot/samplers.hpp"
#include "ldboot/transforms.hpp"

namespace ldboot {

/// Insertion-ordered so emitted documents have a fixed field order.
using Json = nlohmann::ordered_json;

// Every *_from_json is strict: unknown keys, missing required keys and
// wrongly typed values raise ConfigError naming the offending path.

/// Finite numbers as numbers, +inf as the string "inf".
Json to_json(ExtendedReal x);
ExtendedReal extended_from_json(const Json& j, const std::string& path = "value");

/// {"alphabet": s, "mass": [...]}
Json to_json(const FiniteMeasure& m);
FiniteMeasure finite_measure_from_json(const Json& j, const std::string& path = "measure");

/// {"atoms": [...]}
Json to_json(const AtomicWeightMeasure& m);
AtomicWeightMeasure atomic_measure_from_json(const Json& j, const std::string& path = "measure");

/// {"kind": "scaled_poisson", "lambda": 1.0}, {"kind": "binomial", "K": 2},
/// {"kind": "tabulated", "grid": [...], "mass": [...]}
Json to_json(const CgfSpec& cgf);
CgfSpec cgf_from_json(const Json& j, const std::string& path = "cgf");

/// {"variant": "m_out_of_n", "lambda": 1.0}, {"variant": "iid_weighted",
/// "grid": [...], "probs": [...]}, {"variant": "hypergeometric", "K": 3},
/// {"variant": "deterministic", "atoms": [...]}, {"variant": "delete_h",
/// "alpha": 0.5}, {"variant": "k_blocks", "k": 2, "style": "circular"}
Json to_json(const SchemeConfig& scheme);
SchemeConfig scheme_from_json(const Json& j, const std::string& path = "scheme");

/// {"kind": "entropy_to", "reference": m}, {"kind": "indicator_at",
/// "point": m}, {"kind": "scaled_entropy", "lambda": l, "reference": m},
/// {"kind": "tabulated", "points": [m...], "values": [x or "inf" ...]}
Json to_json(const RateFunctionSpec& rate);
RateFunctionSpec rate_spec_from_json(const Json& j, const std::string& path = "rate");

/// Required: scheme, mu, target, epsilon, n_values, replications. Optional
/// with defaults: observations ("fixed_composition" | "iid"), estimator
/// ("direct" | "tilted"), speed ("n" | "m"), seed, fit_points,
/// relative_gap_threshold. The parsed experiment is validated.
Json to_json(const LdpExperiment& exp);
LdpExperiment experiment_from_json(const Json& j, const std::string& path = "experiment");

Json to_json(const RateEstimate& est);

}  // namespace ldboot
