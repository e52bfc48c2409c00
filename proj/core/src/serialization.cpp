#include "ldboot/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ldboot/errors.hpp"

namespace ldboot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_object(const Json& j, const std::string& path, std::set<std::string> required,
                  const std::set<std::string>& optional = {}) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (required.erase(key) == 0 && optional.count(key) == 0) {
      fail(path, "unknown field \"" + key + "\"");
    }
  }
  if (!required.empty()) fail(path, "missing field \"" + *required.begin() + "\"");
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::int64_t integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Library errors raised while building a value from valid JSON shapes are
// still schema problems from the caller's point of view.
template <class F>
auto guarded(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    fail(path, e.what());
  } catch (const DimensionError& e) {
    fail(path, e.what());
  }
}

}  // namespace

Json to_json(ExtendedReal x) {
  if (x.is_infinite()) return Json("inf");
  return Json(x.value());
}

ExtendedReal extended_from_json(const Json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() != "inf") fail(path, "the only string value allowed is \"inf\"");
    return ExtendedReal::infinity();
  }
  return guarded(path, [&] { return ExtendedReal(number(j, path)); });
}

Json to_json(const FiniteMeasure& m) {
  Json j;
  j["alphabet"] = m.alphabet_size();
  j["mass"] = m.values();
  return j;
}

FiniteMeasure finite_measure_from_json(const Json& j, const std::string& path) {
  check_object(j, path, {"alphabet", "mass"});
  const std::int64_t s = integer(j["alphabet"], path + ".alphabet");
  auto mass = numbers(j["mass"], path + ".mass");
  if (s < 1 || static_cast<std::size_t>(s) != mass.size()) {
    fail(path, "alphabet must equal the length of mass (" + std::to_string(mass.size()) + ")");
  }
  return guarded(path, [&] { return FiniteMeasure(std::move(mass)); });
}

Json to_json(const AtomicWeightMeasure& m) {
  Json j;
  j["atoms"] = m.values();
  return j;
}

AtomicWeightMeasure atomic_measure_from_json(const Json& j, const std::string& path) {
  check_object(j, path, {"atoms"});
  auto atoms = numbers(j["atoms"], path + ".atoms");
  return guarded(path, [&] { return AtomicWeightMeasure(std::move(atoms)); });
}

Json to_json(const CgfSpec& cgf) {
  return std::visit(
      overloaded{
          [](const ScaledPoissonLaw& p) {
            Json j;
            j["kind"] = "scaled_poisson";
            j["lambda"] = p.lambda;
            return j;
          },
          [](const BinomialLaw& b) {
            Json j;
            j["kind"] = "binomial";
            j["K"] = b.K;
            return j;
          },
          [](const TabulatedLaw& t) {
            Json j;
            j["kind"] = "tabulated";
            j["grid"] = t.grid;
            j["mass"] = t.mass;
            return j;
          },
      },
      cgf.kind());
}

CgfSpec cgf_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) fail(path, "expected an object with \"kind\"");
  const std::string kind = text(j["kind"], path + ".kind");
  if (kind == "scaled_poisson") {
    check_object(j, path, {"kind", "lambda"});
    const double lambda = number(j["lambda"], path + ".lambda");
    return guarded(path, [&] { return CgfSpec::scaled_poisson(lambda); });
  }
  if (kind == "binomial") {
    check_object(j, path, {"kind", "K"});
    const auto K = integer(j["K"], path + ".K");
    if (K < 2 || K > 1'000'000) fail(path + ".K", "must lie in [2, 1e6]");
    return CgfSpec::binomial(static_cast<int>(K));
  }
  if (kind == "tabulated") {
    check_object(j, path, {"kind", "grid", "mass"});
    auto grid = numbers(j["grid"], path + ".grid");
    auto mass = numbers(j["mass"], path + ".mass");
    return guarded(path, [&] { return CgfSpec::tabulated(std::move(grid), std::move(mass)); });
  }
  fail(path + ".kind", "unknown kind \"" + kind + "\"");
}

Json to_json(const SchemeConfig& scheme) {
  return std::visit(
      overloaded{
          [](const MOutOfN& s) {
            Json j;
            j["variant"] = "m_out_of_n";
            j["lambda"] = s.lambda;
            return j;
          },
          [](const IidWeighted& s) {
            Json j;
            j["variant"] = "iid_weighted";
            j["grid"] = s.grid;
            j["probs"] = s.probs;
            return j;
          },
          [](const Hypergeometric& s) {
            Json j;
            j["variant"] = "hypergeometric";
            j["K"] = s.K;
            return j;
          },
          [](const Deterministic& s) {
            Json j;
            j["variant"] = "deterministic";
            j["atoms"] = s.atoms;
            return j;
          },
          [](const DeleteH& s) {
            Json j;
            j["variant"] = "delete_h";
            j["alpha"] = s.alpha;
            return j;
          },
          [](const KBlocks& s) {
            Json j;
            j["variant"] = "k_blocks";
            j["k"] = s.k;
            j["style"] = s.style == BlockStyle::circular ? "circular" : "moving";
            return j;
          },
      },
      scheme);
}

SchemeConfig scheme_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("variant")) fail(path, "expected an object with \"variant\"");
  const std::string variant = text(j["variant"], path + ".variant");
  SchemeConfig scheme;
  if (variant == "m_out_of_n") {
    check_object(j, path, {"variant", "lambda"});
    scheme = MOutOfN{number(j["lambda"], path + ".lambda")};
  } else if (variant == "iid_weighted") {
    check_object(j, path, {"variant", "grid", "probs"});
    scheme = IidWeighted{numbers(j["grid"], path + ".grid"), numbers(j["probs"], path + ".probs")};
  } else if (variant == "hypergeometric") {
    check_object(j, path, {"variant", "K"});
    const auto K = integer(j["K"], path + ".K");
    if (K < 2 || K > 1'000'000) fail(path + ".K", "must lie in [2, 1e6]");
    scheme = Hypergeometric{static_cast<int>(K)};
  } else if (variant == "deterministic") {
    check_object(j, path, {"variant", "atoms"});
    scheme = Deterministic{numbers(j["atoms"], path + ".atoms")};
  } else if (variant == "delete_h") {
    check_object(j, path, {"variant", "alpha"});
    scheme = DeleteH{number(j["alpha"], path + ".alpha")};
  } else if (variant == "k_blocks") {
    check_object(j, path, {"variant", "k"}, {"style"});
    const auto k = integer(j["k"], path + ".k");
    if (k < 1 || k > 1'000'000) fail(path + ".k", "must lie in [1, 1e6]");
    BlockStyle style = BlockStyle::circular;
    if (j.contains("style")) {
      const std::string st = text(j["style"], path + ".style");
      if (st == "moving") {
        style = BlockStyle::moving;
      } else if (st != "circular") {
        fail(path + ".style", "expected \"circular\" or \"moving\"");
      }
    }
    scheme = KBlocks{static_cast<int>(k), style};
  } else {
    fail(path + ".variant", "unknown variant \"" + variant + "\"");
  }
  try {
    validate(scheme);
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return scheme;
}

Json to_json(const RateFunctionSpec& rate) {
  return std::visit(
      overloaded{
          [](const EntropyTo& r) {
            Json j;
            j["kind"] = "entropy_to";
            j["reference"] = to_json(r.reference);
            return j;
          },
          [](const IndicatorAt& r) {
            Json j;
            j["kind"] = "indicator_at";
            j["point"] = to_json(r.point);
            return j;
          },
          [](const ScaledEntropy& r) {
            Json j;
            j["kind"] = "scaled_entropy";
            j["lambda"] = r.lambda;
            j["reference"] = to_json(r.reference);
            return j;
          },
          [](const TabulatedRate& r) {
            Json j;
            j["kind"] = "tabulated";
            j["points"] = Json::array();
            for (const auto& p : r.points) j["points"].push_back(to_json(p));
            j["values"] = Json::array();
            for (const auto& v : r.values) j["values"].push_back(to_json(v));
            return j;
          },
      },
      rate);
}

RateFunctionSpec rate_spec_from_json(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) fail(path, "expected an object with \"kind\"");
  const std::string kind = text(j["kind"], path + ".kind");
  if (kind == "entropy_to") {
    check_object(j, path, {"kind", "reference"});
    return EntropyTo{finite_measure_from_json(j["reference"], path + ".reference")};
  }
  if (kind == "indicator_at") {
    check_object(j, path, {"kind", "point"});
    return IndicatorAt{finite_measure_from_json(j["point"], path + ".point")};
  }
  if (kind == "scaled_entropy") {
    check_object(j, path, {"kind", "lambda", "reference"});
    const double lambda = number(j["lambda"], path + ".lambda");
    if (!(lambda > 0.0)) fail(path + ".lambda", "must be positive");
    return ScaledEntropy{lambda, finite_measure_from_json(j["reference"], path + ".reference")};
  }
  if (kind == "tabulated") {
    check_object(j, path, {"kind", "points", "values"});
    const Json& points = j["points"];
    const Json& values = j["values"];
    if (!points.is_array() || !values.is_array() || points.size() != values.size() ||
        points.empty()) {
      fail(path, "points and values must be nonempty arrays of equal length");
    }
    TabulatedRate r;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::string at = "[" + std::to_string(i) + "]";
      r.points.push_back(finite_measure_from_json(points[i], path + ".points" + at));
      r.values.push_back(extended_from_json(values[i], path + ".values" + at));
      if (r.values.back() < ExtendedReal(0.0)) fail(path + ".values" + at, "must be nonnegative");
    }
    return r;
  }
  fail(path + ".kind", "unknown kind \"" + kind + "\"");
}

Json to_json(const LdpExperiment& exp) {
  Json j;
  j["scheme"] = to_json(exp.scheme);
  j["observations"] =
      exp.observations == ObservationKind::iid ? "iid" : "fixed_composition";
  j["mu"] = to_json(exp.mu);
  j["target"] = to_json(exp.target);
  j["epsilon"] = exp.epsilon;
  j["n_values"] = exp.n_values;
  j["replications"] = exp.replications;
  j["estimator"] = exp.estimator == EstimatorKind::tilted ? "tilted" : "direct";
  j["speed"] = exp.speed == SpeedKind::m ? "m" : "n";
  j["seed"] = exp.seed;
  j["fit_points"] = exp.fit_points;
  j["relative_gap_threshold"] = exp.relative_gap_threshold;
  return j;
}

LdpExperiment experiment_from_json(const Json& j, const std::string& path) {
  check_object(j, path, {"scheme", "mu", "target", "epsilon", "n_values", "replications"},
               {"observations", "estimator", "speed", "seed", "fit_points",
                "relative_gap_threshold"});
  LdpExperiment exp;
  exp.scheme = scheme_from_json(j["scheme"], path + ".scheme");
  exp.mu = finite_measure_from_json(j["mu"], path + ".mu");
  exp.target = finite_measure_from_json(j["target"], path + ".target");
  exp.epsilon = number(j["epsilon"], path + ".epsilon");
  const Json& ns = j["n_values"];
  if (!ns.is_array()) fail(path + ".n_values", "expected an array of integers");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    exp.n_values.push_back(integer(ns[i], path + ".n_values[" + std::to_string(i) + "]"));
  }
  exp.replications = integer(j["replications"], path + ".replications");
  if (j.contains("observations")) {
    const std::string v = text(j["observations"], path + ".observations");
    if (v == "iid") {
      exp.observations = ObservationKind::iid;
    } else if (v != "fixed_composition") {
      fail(path + ".observations", "expected \"fixed_composition\" or \"iid\"");
    }
  }
  if (j.contains("estimator")) {
    const std::string v = text(j["estimator"], path + ".estimator");
    if (v == "tilted") {
      exp.estimator = EstimatorKind::tilted;
    } else if (v != "direct") {
      fail(path + ".estimator", "expected \"direct\" or \"tilted\"");
    }
  }
  if (j.contains("speed")) {
    const std::string v = text(j["speed"], path + ".speed");
    if (v == "m") {
      exp.speed = SpeedKind::m;
    } else if (v != "n") {
      fail(path + ".speed", "expected \"n\" or \"m\"");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(path + ".seed", "expected a nonnegative integer");
    exp.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("fit_points")) {
    const auto f = integer(j["fit_points"], path + ".fit_points");
    if (f < 3 || f > 1000) fail(path + ".fit_points", "must lie in [3, 1000]");
    exp.fit_points = static_cast<int>(f);
  }
  if (j.contains("relative_gap_threshold")) {
    exp.relative_gap_threshold =
        number(j["relative_gap_threshold"], path + ".relative_gap_threshold");
  }
  try {
    validate(exp);
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  return exp;
}

Json to_json(const RateEstimate& est) {
  Json j;
  j["points"] = Json::array();
  for (const auto& p : est.points) {
    Json row;
    row["n"] = p.n;
    row["speed"] = p.speed;
    row["hits"] = p.hits;
    row["p_hat"] = p.p_hat;
    row["stderr"] = p.stderr_p;
    row["log_p"] = p.missing ? Json("-inf") : Json(p.log_p);
    row["missing"] = p.missing;
    j["points"].push_back(row);
  }
  j["fitted"] = est.fitted;
  j["slope"] = est.fitted ? Json(est.slope) : Json(nullptr);
  j["slope_stderr"] = est.fitted ? Json(est.slope_stderr) : Json(nullptr);
  if (!est.advice.empty()) j["advice"] = est.advice;
  return j;
}

}  // namespace ldboot
