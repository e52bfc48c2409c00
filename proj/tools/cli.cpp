#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coupling.hpp"
#include "ldboot/errors.hpp"
#include "ldboot/format.hpp"
#include "ldboot/measures.hpp"
#include "ldboot/montecarlo.hpp"
#include "ldboot/rates.hpp"
#include "ldboot/samplers.hpp"
#include "ldboot/serialization.hpp"
#include "ldboot/transforms.hpp"

namespace ldboot::cli {

namespace {

// Stream ids under --seed; verify-ldp uses the experiment harness streams.
constexpr std::uint64_t kSampleStream = 1;

struct Globals {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int workers = 1;
  std::string out_path;
  std::string format;
};

struct Context {
  Globals g;
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

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

std::int64_t integer(const Json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < lo || v > hi) {
    fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

double positive_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "expected a positive finite number");
  return v;
}

FiniteMeasure probability(const Json& j, const std::string& path) {
  FiniteMeasure m = finite_measure_from_json(j, path);
  if (!m.is_probability()) fail(path, "expected a probability vector");
  return m;
}

Json read_config(Context& ctx) {
  if (ctx.g.config_path.empty()) throw ConfigError("--config is required");
  std::string text;
  if (ctx.g.config_path == "-") {
    text.assign(std::istreambuf_iterator<char>(ctx.in), std::istreambuf_iterator<char>());
  } else {
    std::ifstream file(ctx.g.config_path);
    if (!file) throw ConfigError("cannot open config file " + ctx.g.config_path);
    text.assign(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>());
  }
  return Json::parse(text);
}

std::string output_format(const Context& ctx, const char* fallback) {
  return ctx.g.format.empty() ? fallback : ctx.g.format;
}

// Primary output: the --out file when given, the output stream otherwise.
class Sink {
 public:
  Sink(const Context& ctx, const std::string& path) : os_(&ctx.out) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw ConfigError("cannot open output file " + path);
    os_ = &file_;
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void write_json(std::ostream& os, const Json& j) { os << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// sample

int cmd_sample(Context& ctx) {
  const Json cfg = read_config(ctx);
  check_object(cfg, "config", {"scheme", "n", "replications"});
  const SchemeConfig scheme = scheme_from_json(cfg["scheme"], "config.scheme");
  const std::int64_t n = integer(cfg["n"], "config.n", 1, 1'000'000);
  const std::int64_t reps = integer(cfg["replications"], "config.replications", 1, 10'000'000);
  const std::string format = output_format(ctx, "csv");

  Rng rng = Rng::stream(ctx.g.seed, kSampleStream, 0);
  Sink sink(ctx, ctx.g.out_path);
  std::ostream& os = sink.stream();
  double max_deviation = 0.0;
  Json rows = Json::array();
  // The first draw runs before anything is written, so a scheme that
  // rejects this n leaves no partial table behind.
  std::vector<double> w = sample_weights(scheme, n, rng);
  if (format == "csv") {
    for (std::int64_t i = 1; i <= n; ++i) os << (i > 1 ? "," : "") << 'w' << i;
    os << '\n';
  }
  for (std::int64_t r = 0; r < reps; ++r) {
    if (r > 0) w = sample_weights(scheme, n, rng);
    double total = 0.0;
    for (double v : w) total += v;
    max_deviation = std::max(max_deviation, std::abs(total - static_cast<double>(n)));
    if (format == "csv") {
      for (std::size_t i = 0; i < w.size(); ++i) os << (i > 0 ? "," : "") << format_double(w[i]);
      os << '\n';
    } else {
      rows.push_back(w);
    }
  }
  if (format == "json") {
    Json doc;
    doc["scheme"] = to_json(scheme);
    doc["n"] = n;
    doc["replications"] = reps;
    doc["weights"] = std::move(rows);
    doc["h1_max_deviation"] = max_deviation;
    write_json(os, doc);
  }
  ctx.err << "H1 check: max |sum(w) - n| = " << format_double(max_deviation) << " over " << reps
          << " rows\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// rate

bool absolutely_continuous(const FiniteMeasure& nu, const FiniteMeasure& mu) {
  for (std::size_t i = 0; i < nu.alphabet_size(); ++i) {
    if (nu[i] > 0.0 && mu[i] <= 0.0) return false;
  }
  return true;
}

double max_ratio(const FiniteMeasure& nu, const FiniteMeasure& mu) {
  double out = 0.0;
  for (std::size_t i = 0; i < nu.alphabet_size(); ++i) {
    if (mu[i] > 0.0) out = std::max(out, nu[i] / mu[i]);
  }
  return out;
}

std::string infinite_reason(const SchemeConfig& scheme, const FiniteMeasure& nu,
                            const FiniteMeasure& mu) {
  if (const auto* jack = std::get_if<DeleteH>(&scheme); jack && jack->alpha == 0.0) {
    return "nu_differs_from_mu";
  }
  if (!absolutely_continuous(nu, mu)) return "not_absolutely_continuous";
  if (std::holds_alternative<DeleteH>(scheme)) return "chi_not_probability";
  if (std::holds_alternative<Hypergeometric>(scheme)) return "ratio_exceeds_K";
  if (std::holds_alternative<IidWeighted>(scheme)) return "ratio_outside_weight_support";
  if (std::holds_alternative<Deterministic>(scheme)) return "kernel_constraints_infeasible";
  return "marginal_constraints_infeasible";
}

struct OracleCheck {
  std::string name;
  bool passed = false;
  Json detail;
};

bool agree(ExtendedReal a, ExtendedReal b, double tol) {
  if (a.is_infinite() || b.is_infinite()) return a.is_infinite() && b.is_infinite();
  return std::abs(a.value() - b.value()) <= tol * std::max(1.0, std::abs(b.value()));
}

OracleCheck comparison(std::string name, ExtendedReal value, ExtendedReal reference, double tol) {
  OracleCheck c{std::move(name), agree(value, reference, tol), Json::object()};
  c.detail["reference"] = to_json(reference);
  c.detail["tolerance"] = tol;
  return c;
}

std::vector<OracleCheck> conditional_checks(const SchemeConfig& scheme, const FiniteMeasure& nu,
                                            const FiniteMeasure& mu, ExtendedReal value) {
  std::vector<OracleCheck> checks;
  if (const auto* efron = std::get_if<MOutOfN>(&scheme)) {
    const double lambda = efron->lambda;
    const ExtendedReal bound = rate_kullback_bound(
        nu, mu, [lambda](double x) { return legendre_scaled_poisson(lambda, x); });
    checks.push_back(comparison("kullback_bound_scaled_poisson", value, bound, 1e-9));
  } else if (const auto* jack = std::get_if<DeleteH>(&scheme); jack && jack->alpha > 0.0) {
    const double a = jack->alpha;
    const ConditionalRateResult pinned =
        rate_pinned_weight_law(nu, mu, {0.0, 1.0 / (1.0 - a)}, {a, 1.0 - a});
    checks.push_back(comparison("pinned_kernel_solver", value, pinned.value, 1e-9));
  } else if (std::holds_alternative<KBlocks>(scheme)) {
    checks.push_back(comparison("iid_entropy_identity", value, relative_entropy(nu, mu), 1e-6));
  } else if (const auto* hyper = std::get_if<Hypergeometric>(&scheme)) {
    const bool saturated = !absolutely_continuous(nu, mu) || max_ratio(nu, mu) > hyper->K;
    OracleCheck c{"saturation_at_K", saturated == value.is_infinite(), Json::object()};
    c.detail["max_ratio"] = to_json(absolutely_continuous(nu, mu)
                                        ? ExtendedReal(max_ratio(nu, mu))
                                        : ExtendedReal::infinity());
    c.detail["K"] = hyper->K;
    checks.push_back(std::move(c));
  } else if (const auto* iid = std::get_if<IidWeighted>(&scheme)) {
    const ExtendedReal at_one = rate_kullback_bound(
        nu, mu, legendre_evaluator(CgfSpec::tabulated(iid->grid, iid->probs)));
    OracleCheck c{"not_above_kullback_at_unit_scale", value <= at_one + 1e-9, Json::object()};
    c.detail["reference"] = to_json(at_one);
    checks.push_back(std::move(c));
  }
  return checks;
}

// Points of the simplex with coordinates in {0, 1/N, ..., 1}, lexicographic.
std::vector<FiniteMeasure> simplex_grid(std::size_t s, int N) {
  std::vector<FiniteMeasure> out;
  std::vector<int> parts(s, 0);
  auto recurse = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == s) {
      parts[i] = left;
      std::vector<double> mass(s);
      for (std::size_t k = 0; k < s; ++k) mass[k] = static_cast<double>(parts[k]) / N;
      out.emplace_back(std::move(mass));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      parts[i] = v;
      self(self, i + 1, left - v);
    }
  };
  recurse(recurse, 0, N);
  return out;
}

int rate_table(Context& ctx, const Json& cfg, const SchemeConfig& scheme) {
  const FiniteMeasure mu = probability(cfg["mu"], "config.mu");
  if (!cfg["mesh"].is_number()) fail("config.mesh", "expected a number");
  const double mesh = cfg["mesh"].get<double>();
  const double steps = std::round(1.0 / mesh);
  if (!(mesh > 0.0) || std::abs(steps * mesh - 1.0) > 1e-9 || steps > 200) {
    fail("config.mesh", "must be 1/N for an integer N in [1, 200]");
  }
  if (mu.alphabet_size() > 4) throw UnsupportedError("rate table: alphabets of size <= 4 only");
  const ConditionalRateFn cond = conditional_rate_for(scheme);
  const std::string format = output_format(ctx, "csv");
  Sink sink(ctx, ctx.g.out_path);
  std::ostream& os = sink.stream();
  Json rows = Json::array();
  const std::size_t s = mu.alphabet_size();
  if (format == "csv") {
    for (std::size_t i = 1; i <= s; ++i) os << "nu" << i << ',';
    os << "value\n";
  }
  for (const FiniteMeasure& nu : simplex_grid(s, static_cast<int>(steps))) {
    const ExtendedReal v = cond(nu, mu);
    if (format == "csv") {
      for (double x : nu.values()) os << format_double(x) << ',';
      os << format_double(v.value()) << '\n';
    } else {
      rows.push_back(Json{{"nu", to_json(nu)}, {"value", to_json(v)}});
    }
  }
  if (format == "json") {
    write_json(os, Json{{"scheme", to_json(scheme)}, {"mu", to_json(mu)}, {"rows", rows}});
  }
  return kOk;
}

int cmd_rate(Context& ctx) {
  const Json cfg = read_config(ctx);
  if (!cfg.is_object()) fail("config", "expected an object");
  if (cfg.contains("mesh")) {
    check_object(cfg, "config", {"scheme", "mu", "mesh"});
    return rate_table(ctx, cfg, scheme_from_json(cfg["scheme"], "config.scheme"));
  }
  const bool unconditional = cfg.contains("ix");
  if (unconditional) {
    check_object(cfg, "config", {"scheme", "nu", "ix"}, {"tol"});
  } else {
    check_object(cfg, "config", {"scheme", "nu", "mu"}, {"tol"});
  }
  const SchemeConfig scheme = scheme_from_json(cfg["scheme"], "config.scheme");
  const FiniteMeasure nu = probability(cfg["nu"], "config.nu");
  const double tol = cfg.contains("tol") ? positive_number(cfg["tol"], "config.tol") : 1e-9;
  const ConditionalRateFn cond = conditional_rate_for(scheme);

  Json doc;
  doc["scheme"] = to_json(scheme);
  doc["mode"] = unconditional ? "unconditional" : "conditional";
  doc["nu"] = to_json(nu);
  std::vector<OracleCheck> checks;
  Json diagnostics = Json::object();

  if (!unconditional) {
    const FiniteMeasure mu = probability(cfg["mu"], "config.mu");
    if (mu.alphabet_size() != nu.alphabet_size()) {
      throw DimensionError("nu and mu have different alphabet sizes");
    }
    doc["mu"] = to_json(mu);
    ExtendedReal value;
    if (const auto* blocks = std::get_if<KBlocks>(&scheme)) {
      const KBlocksRate r = rate_k_blocks(nu, product_measure(mu, blocks->k), blocks->k);
      value = r.value;
      diagnostics["dual_gap"] = r.dual_gap;
      diagnostics["iterations"] = r.iterations;
    } else if (const auto* iid = std::get_if<IidWeighted>(&scheme)) {
      const IidWeightedRate r = rate_iid_weighted(
          nu, mu, legendre_evaluator(CgfSpec::tabulated(iid->grid, iid->probs)));
      value = r.value;
      if (r.value.is_finite()) diagnostics["argmin_m"] = r.argmin_m;
    } else {
      value = cond(nu, mu);
    }
    doc["value"] = to_json(value);
    doc["reason"] = value.is_infinite() ? Json(infinite_reason(scheme, nu, mu)) : Json(nullptr);
    checks = conditional_checks(scheme, nu, mu, value);
  } else {
    const RateFunctionSpec ix = rate_spec_from_json(cfg["ix"], "config.ix");
    doc["ix"] = to_json(ix);
    const ExtendedReal ix_at_nu = evaluate(ix, nu);
    UnconditionalRate r;
    if (const auto* jack = std::get_if<DeleteH>(&scheme)) {
      r = rate_jackknife_unconditional(nu, ix, jack->alpha, tol);
    } else {
      r = rate_unconditional(nu, ix, cond, tol);
    }
    doc["value"] = to_json(r.value);
    doc["reason"] = r.value.is_infinite() ? Json("no_finite_point") : Json(nullptr);
    if (r.value.is_finite()) doc["argmin"] = to_json(r.argmin);
    diagnostics["evaluations"] = r.evaluations;
    diagnostics["ix_at_nu"] = to_json(ix_at_nu);
    OracleCheck c{"smoothing_inequality", r.value <= ix_at_nu + 1e-9, Json::object()};
    c.detail["reference"] = to_json(ix_at_nu);
    checks.push_back(std::move(c));
  }
  doc["lower_bound"] = is_lower_bound(scheme);

  bool all_passed = true;
  Json check_json = Json::array();
  for (const OracleCheck& c : checks) {
    Json entry;
    entry["name"] = c.name;
    entry["passed"] = c.passed;
    for (const auto& [k, v] : c.detail.items()) entry[k] = v;
    check_json.push_back(std::move(entry));
    all_passed = all_passed && c.passed;
  }
  doc["oracle_checks_run"] = std::move(check_json);
  doc["diagnostics"] = std::move(diagnostics);

  Sink sink(ctx, ctx.g.out_path);
  write_json(sink.stream(), doc);
  if (!all_passed) {
    ctx.err << "numeric failure: an oracle cross-check disagreed with the evaluator\n";
    return kNumericFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// verify-ldp

Json point_json(const RatePoint& p) {
  Json j;
  j["n"] = p.n;
  j["speed"] = p.speed;
  j["hits"] = p.hits;
  j["p_hat"] = p.p_hat;
  j["stderr"] = p.stderr_p;
  j["log_p"] = p.missing ? Json("-inf") : Json(p.log_p);
  j["log_p_stderr"] = p.missing ? Json(nullptr) : Json(p.log_p_stderr);
  j["missing"] = p.missing;
  return j;
}

void write_points_csv(std::ostream& os, const std::vector<RatePoint>& points) {
  os << "n,speed,hits,p_hat,stderr,log_p,log_p_stderr,missing\n";
  for (const RatePoint& p : points) {
    os << p.n << ',' << format_double(p.speed) << ',' << p.hits << ',' << format_double(p.p_hat)
       << ',' << format_double(p.stderr_p) << ',' << format_double(p.missing ? -INFINITY : p.log_p)
       << ',' << (p.missing ? std::string("nan") : format_double(p.log_p_stderr)) << ','
       << (p.missing ? 1 : 0) << '\n';
  }
}

int cmd_verify_ldp(Context& ctx) {
  const Json cfg = read_config(ctx);
  LdpExperiment exp = experiment_from_json(cfg, "config");
  if (ctx.g.seed_given) exp.seed = ctx.g.seed;
  const std::string format = output_format(ctx, "csv");

  RateEstimate est = run_ldp(exp, ctx.g.workers);
  const double ball = analytic_ball_infimum(exp);

  Json per_n = Json::array();
  for (const RatePoint& p : est.points) per_n.push_back(point_json(p));
  if (!ctx.g.out_path.empty()) {
    Sink sink(ctx, ctx.g.out_path);
    if (format == "csv") {
      write_points_csv(sink.stream(), est.points);
    } else {
      write_json(sink.stream(), per_n);
    }
  }

  Json summary;
  summary["experiment"] = to_json(exp);
  summary["fitted"] = est.fitted;
  summary["slope"] = est.fitted ? Json(est.slope) : Json(nullptr);
  summary["stderr"] = est.fitted ? Json(est.slope_stderr) : Json(nullptr);
  summary["ball_infimum"] = ball;
  bool pass = false;
  if (ball <= 1e-12) {
    summary["check"] = "z_score";
    summary["threshold"] = 2.0;
    if (est.fitted && est.slope_stderr > 0.0) {
      const double z = est.slope / est.slope_stderr;
      summary["z_score"] = z;
      pass = std::abs(z) < 2.0;
    } else {
      summary["z_score"] = nullptr;
    }
  } else {
    summary["check"] = "relative_gap";
    summary["threshold"] = exp.relative_gap_threshold;
    if (est.fitted) {
      const double gap = std::abs(est.slope - ball) / ball;
      summary["relative_gap"] = gap;
      pass = gap <= exp.relative_gap_threshold;
    } else {
      summary["relative_gap"] = nullptr;
    }
  }
  summary["pass"] = pass;
  summary["advice"] = est.advice;
  if (ctx.g.out_path.empty()) summary["per_n"] = per_n;
  write_json(ctx.out, summary);

  if (!est.fitted) {
    ctx.err << "warning: " << est.advice << '\n';
    return kDegenerate;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// couple

int cmd_couple(Context& ctx) {
  const Json cfg = read_config(ctx);
  check_object(cfg, "config", {"n", "m", "replications"}, {"competitors"});
  CouplingConfig c;
  c.n = integer(cfg["n"], "config.n", 1, 1'000'000);
  c.m = integer(cfg["m"], "config.m", 1, 1'000'000);
  c.replications = integer(cfg["replications"], "config.replications", 1, 100'000'000);
  if (cfg.contains("competitors")) {
    c.competitors = static_cast<int>(integer(cfg["competitors"], "config.competitors", 0, 10'000));
  }
  const CouplingReport r = run_coupling_diagnostics(c, ctx.g.seed);

  Json doc;
  doc["n"] = c.n;
  doc["m"] = c.m;
  doc["replications"] = c.replications;
  doc["chi_square"] = {{"statistic", r.chi_square}, {"dof", r.chi_square_dof},
                       {"p_value", r.chi_square_p}};
  doc["optimality"] = {{"competitors_per_sample", c.competitors},
                       {"comparisons", r.comparisons},
                       {"violations", r.violations}};
  doc["mean_w1"] = r.mean_w1;
  doc["mean_moved_mass"] = r.mean_moved_mass;
  doc["exact_sum_branch"] = {{"frequency", r.exact_sum_frequency},
                             {"poisson_mass", r.poisson_mass},
                             {"stderr", r.exact_sum_stderr},
                             {"z", r.exact_sum_z}};
  if (c.n == 1) doc["first_cell_always_m"] = r.first_cell_always_m;

  Sink sink(ctx, ctx.g.out_path);
  if (output_format(ctx, "json") == "json") {
    write_json(sink.stream(), doc);
  } else {
    std::ostream& os = sink.stream();
    os << "metric,value\n";
    os << "chi_square," << format_double(r.chi_square) << '\n';
    os << "chi_square_dof," << r.chi_square_dof << '\n';
    os << "chi_square_p," << format_double(r.chi_square_p) << '\n';
    os << "violations," << r.violations << '\n';
    os << "comparisons," << r.comparisons << '\n';
    os << "mean_w1," << format_double(r.mean_w1) << '\n';
    os << "exact_sum_frequency," << format_double(r.exact_sum_frequency) << '\n';
    os << "poisson_mass," << format_double(r.poisson_mass) << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// legendre

int cmd_legendre(Context& ctx) {
  const Json cfg = read_config(ctx);
  check_object(cfg, "config", {"cgf", "x"}, {"tol"});
  const CgfSpec cgf = cgf_from_json(cfg["cgf"], "config.cgf");
  if (!cfg["x"].is_array() || cfg["x"].empty()) fail("config.x", "expected a nonempty array");
  std::vector<double> xs;
  for (std::size_t i = 0; i < cfg["x"].size(); ++i) {
    const Json& v = cfg["x"][i];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail("config.x[" + std::to_string(i) + "]", "expected a finite number");
    }
    xs.push_back(v.get<double>());
  }
  const double tol = cfg.contains("tol") ? positive_number(cfg["tol"], "config.tol") : 1e-12;
  const std::optional<LegendreFn> closed = closed_form_legendre(cgf);

  struct Row {
    double x;
    std::optional<ExtendedReal> closed;
    ExtendedReal numeric;
    std::optional<double> diff;
  };
  std::vector<Row> rows;
  double max_diff = 0.0;
  for (double x : xs) {
    Row row{x, std::nullopt, legendre_numeric(cgf, x, tol).value, std::nullopt};
    if (closed) {
      row.closed = (*closed)(x);
      if (row.closed->is_infinite() || row.numeric.is_infinite()) {
        row.diff = row.closed->is_infinite() && row.numeric.is_infinite() ? 0.0 : INFINITY;
      } else {
        row.diff = std::abs(row.closed->value() - row.numeric.value());
      }
      max_diff = std::max(max_diff, *row.diff);
    }
    rows.push_back(row);
  }

  Sink sink(ctx, ctx.g.out_path);
  std::ostream& os = sink.stream();
  if (output_format(ctx, "csv") == "csv") {
    os << "x,closed_form,numeric,abs_diff\n";
    for (const Row& r : rows) {
      os << format_double(r.x) << ',' << (r.closed ? format_double(r.closed->value()) : "") << ','
         << format_double(r.numeric.value()) << ',' << (r.diff ? format_double(*r.diff) : "")
         << '\n';
    }
    ctx.err << "max discrepancy: "
            << (closed ? format_double(max_diff) : std::string("n/a (no closed form)")) << '\n';
  } else {
    Json doc;
    doc["cgf"] = to_json(cgf);
    Json table = Json::array();
    for (const Row& r : rows) {
      table.push_back({{"x", r.x},
                       {"closed_form", r.closed ? to_json(*r.closed) : Json(nullptr)},
                       {"numeric", to_json(r.numeric)},
                       {"abs_diff", r.diff ? to_json(ExtendedReal(*r.diff)) : Json(nullptr)}});
    }
    doc["rows"] = std::move(table);
    doc["max_discrepancy"] = closed ? to_json(ExtendedReal(max_diff)) : Json(nullptr);
    write_json(os, doc);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// w1

int cmd_w1(Context& ctx) {
  const Json cfg = read_config(ctx);
  check_object(cfg, "config", {"a", "b"});
  const AtomicWeightMeasure a = atomic_measure_from_json(cfg["a"], "config.a");
  const AtomicWeightMeasure b = atomic_measure_from_json(cfg["b"], "config.b");
  const double d = w1_line(a, b);
  Sink sink(ctx, ctx.g.out_path);
  if (output_format(ctx, "json") == "json") {
    write_json(sink.stream(), Json{{"w1", d}});
  } else {
    sink.stream() << "w1\n" << format_double(d) << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Exchangeable-weight bootstrap schemes and their large-deviation rates", "ldboot"};
  Globals g;
  app.add_option("--config", g.config_path, "Command config JSON file, or - for stdin");
  auto* seed_opt = app.add_option("--seed", g.seed, "Root seed of every random stream");
  app.add_option("--workers", g.workers, "Monte Carlo worker threads")
      ->check(CLI::Range(1, 256));
  app.add_option("--out", g.out_path, "Write the primary table to this file");
  app.add_option("--format", g.format, "Primary output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.fallthrough();
  app.require_subcommand(1);

  auto* sample = app.add_subcommand("sample", "Draw weight vectors from a scheme");
  auto* rate = app.add_subcommand("rate", "Evaluate a conditional or unconditional rate");
  auto* verify = app.add_subcommand("verify-ldp", "Monte Carlo check of an LDP slope");
  auto* couple = app.add_subcommand("couple", "Poisson / multinomial coupling diagnostics");
  auto* legendre = app.add_subcommand("legendre", "Tabulate Legendre transforms");
  auto* w1 = app.add_subcommand("w1", "W1 distance between two atomic measures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kSchemaError;
  }
  g.seed_given = seed_opt->count() > 0;

  Context ctx{g, in, out, err};
  try {
    if (sample->parsed()) return cmd_sample(ctx);
    if (rate->parsed()) return cmd_rate(ctx);
    if (verify->parsed()) return cmd_verify_ldp(ctx);
    if (couple->parsed()) return cmd_couple(ctx);
    if (legendre->parsed()) return cmd_legendre(ctx);
    if (w1->parsed()) return cmd_w1(ctx);
    return kSchemaError;
  } catch (const DegenerateEstimatorError& e) {
    err << "warning: degenerate estimator: " << e.what() << '\n';
    return kDegenerate;
  } catch (const ConfigError& e) {
    err << "schema error: " << e.what() << '\n';
    return kSchemaError;
  } catch (const nlohmann::json::exception& e) {
    err << "schema error: " << e.what() << '\n';
    return kSchemaError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    // Dimension, domain, contract and unsupported-case errors are all
    // rejections of the input.
    err << "invalid input: " << e.what() << '\n';
    return kSchemaError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace ldboot::cli
