#include "ldboot/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ldboot/errors.hpp"
#include "ldboot/format.hpp"

namespace ldboot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Contributions are stored as exp(log contribution + shift) so that rare
// events far below 1e-300 stay representable.
struct Accumulator {
  std::int64_t count = 0;
  std::int64_t hits = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(bool hit, double contribution) {
    ++count;
    if (!hit) return;
    ++hits;
    sum += contribution;
    sum_sq += contribution * contribution;
  }
  void merge(const Accumulator& o) {
    count += o.count;
    hits += o.hits;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
};

using BlockBody = std::function<Accumulator(std::int64_t block, std::int64_t count)>;

Accumulator run_blocks(std::int64_t replications, int workers, const BlockBody& body) {
  const std::int64_t blocks = (replications + kReplicationBlock - 1) / kReplicationBlock;
  std::vector<Accumulator> results(static_cast<std::size_t>(blocks));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        const std::int64_t count =
            std::min(kReplicationBlock, replications - b * kReplicationBlock);
        results[static_cast<std::size_t>(b)] = body(b, count);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
        return;
      }
    }
  };
  const auto threads = static_cast<std::int64_t>(std::max(1, workers));
  if (threads == 1 || blocks == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::int64_t t = 0; t < std::min(threads, blocks); ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  Accumulator total;
  for (const auto& r : results) total.merge(r);
  return total;
}

RatePoint summarize(const Accumulator& acc, double shift, std::int64_t n, double speed) {
  RatePoint point;
  point.n = n;
  point.speed = speed;
  point.hits = acc.hits;
  const auto R = static_cast<double>(acc.count);
  if (acc.sum <= 0.0) {
    point.missing = true;
    point.log_p = -kInf;
    point.log_p_stderr = kInf;
    return point;
  }
  const double mean = acc.sum / R;
  const double var = std::max(0.0, (acc.sum_sq - acc.sum * mean) / (R - 1.0));
  const double se = std::sqrt(var / R);
  point.log_p = std::log(mean) - shift;
  point.p_hat = std::exp(point.log_p);
  point.stderr_p = se * std::exp(-shift);
  if (se > 0.0) {
    point.log_p_stderr = se / mean;
  } else {
    // Every sample hit with the same weight: borrow the binomial variance
    // of a smoothed hit rate so the point keeps a finite weight.
    const double p = (static_cast<double>(acc.hits) + 0.5) / (R + 1.0);
    point.log_p_stderr = std::sqrt((1.0 - p) / (R * p));
  }
  return point;
}

double tv_to(std::span<const double> a, const FiniteMeasure& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

// Symbol-level tilt of the m-out-of-n cell law.
struct EfronTilt {
  std::vector<double> q;
  std::vector<double> log_ratio;  // ln p_s - ln q_s; -inf when p_s = 0 < q_s
  double shift = 0.0;
};

EfronTilt make_tilt(const std::vector<double>& p, std::int64_t m, const FiniteMeasure& nu,
                    const std::optional<FiniteMeasure>& tilt) {
  const std::size_t s = p.size();
  EfronTilt t;
  if (tilt) {
    if (tilt->alphabet_size() != s) throw DimensionError("tilted estimator: tilt size differs");
    t.q = tilt->values();
  } else {
    t.q.assign(s, 0.0);
    for (std::size_t i = 0; i < s; ++i) t.q[i] = p[i] > 0.0 ? nu[i] : 0.0;
  }
  double total = 0.0;
  for (double v : t.q) total += v;
  if (!(total > 0.0)) {
    throw DegenerateEstimatorError("tilted estimator: the tilt puts no mass on the observed symbols");
  }
  for (double& v : t.q) v /= total;
  if (tilt && tv_to(t.q, FiniteMeasure(p)) <= 1e-15) t.q = p;
  t.log_ratio.assign(s, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    if (p[i] > 0.0 && t.q[i] == 0.0) {
      throw DegenerateEstimatorError("tilted estimator: tilt vanishes on symbol " +
                                     std::to_string(i) + " which carries mass " +
                                     format_double(p[i]));
    }
    if (t.q[i] > 0.0) {
      t.log_ratio[i] = p[i] > 0.0 ? std::log(p[i]) - std::log(t.q[i]) : -kInf;
    }
    if (std::isfinite(t.log_ratio[i])) {
      t.shift -= static_cast<double>(m) * t.q[i] * t.log_ratio[i];
    }
  }
  return t;
}

// One block of the (possibly tilted) m-out-of-n estimator on a composition.
Accumulator efron_block(std::int64_t m, const EfronTilt& tilt, const FiniteMeasure& nu,
                        double epsilon, std::int64_t count, Rng& rng) {
  Accumulator acc;
  const std::size_t s = tilt.q.size();
  std::vector<double> L(s);
  for (std::int64_t r = 0; r < count; ++r) {
    const auto N = sample_multinomial(rng, m, tilt.q);
    double log_lr = tilt.shift;
    for (std::size_t i = 0; i < s; ++i) {
      L[i] = static_cast<double>(N[i]) / static_cast<double>(m);
      if (N[i] > 0) log_lr += static_cast<double>(N[i]) * tilt.log_ratio[i];
    }
    const bool hit = tv_to(L, nu) < epsilon;
    acc.add(hit, hit ? std::exp(log_lr) : 0.0);
  }
  return acc;
}

std::vector<double> composition_law(const std::vector<std::int64_t>& comp, std::int64_t n) {
  std::vector<double> p(comp.size());
  for (std::size_t i = 0; i < comp.size(); ++i) {
    p[i] = static_cast<double>(comp[i]) / static_cast<double>(n);
  }
  return p;
}

double speed_of(const LdpExperiment& exp, std::int64_t n) {
  if (exp.speed == SpeedKind::m) {
    return static_cast<double>(resample_size(std::get<MOutOfN>(exp.scheme), n));
  }
  return static_cast<double>(n);
}

void finish(RateEstimate& est, const LdpExperiment& exp) {
  const auto total = static_cast<int>(est.points.size());
  const int first = std::max(0, total - exp.fit_points);
  std::vector<FitPoint> fit;
  std::string missing;
  for (int i = first; i < total; ++i) {
    const RatePoint& p = est.points[static_cast<std::size_t>(i)];
    if (p.missing) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(p.n);
      continue;
    }
    fit.push_back({p.speed, p.log_p, 1.0 / (p.log_p_stderr * p.log_p_stderr)});
  }
  if (!missing.empty() || fit.size() < 3) {
    est.fitted = false;
    est.advice = "no hits at n = " + missing + "; " +
                 (std::holds_alternative<MOutOfN>(exp.scheme)
                      ? std::string("use the tilted estimator or more replications")
                      : std::string("use more replications or smaller n"));
    return;
  }
  const SlopeFit f = fit_rate_slope(fit);
  est.fitted = true;
  est.slope = f.slope;
  est.slope_stderr = f.stderr_slope;
}

}  // namespace

void validate(const LdpExperiment& exp) {
  validate(exp.scheme);
  if (!(exp.epsilon > 0.0 && exp.epsilon < 1.0)) {
    throw ConfigError("experiment: epsilon must lie in (0, 1)");
  }
  if (exp.mu.alphabet_size() == 0 || exp.mu.alphabet_size() != exp.target.alphabet_size()) {
    throw ConfigError("experiment: mu and target must share a nonempty alphabet");
  }
  if (!exp.mu.is_probability() || !exp.target.is_probability()) {
    throw ConfigError("experiment: mu and target must be probability vectors");
  }
  if (exp.n_values.empty()) throw ConfigError("experiment: n_values is empty");
  for (std::size_t i = 0; i < exp.n_values.size(); ++i) {
    if (exp.n_values[i] < static_cast<std::int64_t>(exp.mu.alphabet_size())) {
      throw ConfigError("experiment: n = " + std::to_string(exp.n_values[i]) +
                        " is below the alphabet size");
    }
    if (i > 0 && exp.n_values[i] <= exp.n_values[i - 1]) {
      throw ConfigError("experiment: n_values must be strictly increasing");
    }
  }
  if (exp.replications < 1000) throw ConfigError("experiment: replications must be >= 1000");
  if (exp.fit_points < 3) throw ConfigError("experiment: fit_points must be >= 3");
  if (!(exp.relative_gap_threshold > 0.0)) {
    throw ConfigError("experiment: relative_gap_threshold must be positive");
  }
  const bool efron = std::holds_alternative<MOutOfN>(exp.scheme);
  if (exp.estimator == EstimatorKind::tilted && !efron) {
    throw ConfigError("experiment: the tilted estimator exists for m_out_of_n only");
  }
  if (exp.speed == SpeedKind::m && !efron) {
    throw ConfigError("experiment: speed m applies to m_out_of_n only");
  }
  if (exp.observations == ObservationKind::fixed_composition) {
    for (auto n : exp.n_values) composition_counts(exp.mu, n);
  }
}

SlopeFit fit_rate_slope(const std::vector<FitPoint>& points) {
  std::vector<FitPoint> usable;
  for (const auto& p : points) {
    if (std::isfinite(p.x) && std::isfinite(p.log_p) && p.weight > 0.0 &&
        std::isfinite(p.weight)) {
      usable.push_back(p);
    }
  }
  if (usable.size() < 3) {
    throw ContractError("fit_rate_slope: need at least 3 finite points, got " +
                        std::to_string(usable.size()));
  }
  double sw = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : usable) {
    sw += p.weight;
    sx += p.weight * p.x;
    sy += p.weight * -p.log_p;
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : usable) {
    const double dx = p.x - xbar;
    sxx += p.weight * dx * dx;
    sxy += p.weight * dx * (-p.log_p - ybar);
  }
  if (!(sxx > 0.0)) throw ContractError("fit_rate_slope: all x values coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.stderr_slope = std::sqrt(1.0 / sxx);
  return fit;
}

TiltedOutcome tilted_efron_estimator(std::int64_t n, std::int64_t m,
                                     const std::vector<std::int64_t>& composition,
                                     const FiniteMeasure& nu, double epsilon,
                                     std::int64_t replications, Rng& rng,
                                     const std::optional<FiniteMeasure>& tilt) {
  if (n < 1 || m < 1) throw DomainError("tilted_efron_estimator: n and m must be positive");
  if (replications < 2) throw DomainError("tilted_efron_estimator: need >= 2 replications");
  if (composition.size() != nu.alphabet_size()) {
    throw DimensionError("tilted_efron_estimator: composition and nu differ in size");
  }
  std::int64_t total = 0;
  for (auto c : composition) {
    if (c < 0) throw DomainError("tilted_efron_estimator: negative composition count");
    total += c;
  }
  if (total != n) throw DomainError("tilted_efron_estimator: composition must sum to n");
  const auto p = composition_law(composition, n);
  const EfronTilt t = make_tilt(p, m, nu, tilt);
  const Accumulator acc = efron_block(m, t, nu, epsilon, replications, rng);
  const RatePoint point = summarize(acc, t.shift, n, static_cast<double>(n));
  return {point.p_hat, point.stderr_p, point.log_p, point.log_p_stderr, point.hits};
}

RateEstimate run_conditional_ldp(const LdpExperiment& exp, int workers) {
  validate(exp);
  if (exp.observations != ObservationKind::fixed_composition) {
    throw ConfigError("run_conditional_ldp: observations must be a fixed composition");
  }
  RateEstimate est;
  const std::size_t s = exp.mu.alphabet_size();
  for (std::size_t idx = 0; idx < exp.n_values.size(); ++idx) {
    const std::int64_t n = exp.n_values[idx];
    const auto comp = composition_counts(exp.mu, n);
    const std::uint64_t weight_stream = 2 * idx + 1;
    Accumulator acc;
    double shift = 0.0;
    if (const auto* efron = std::get_if<MOutOfN>(&exp.scheme)) {
      const std::int64_t m = resample_size(*efron, n);
      const auto p = composition_law(comp, n);
      const EfronTilt tilt =
          exp.estimator == EstimatorKind::tilted
              ? make_tilt(p, m, exp.target, std::nullopt)
              : make_tilt(p, m, exp.target, FiniteMeasure(p));
      shift = tilt.shift;
      acc = run_blocks(exp.replications, workers, [&](std::int64_t b, std::int64_t count) {
        Rng rng = Rng::stream(exp.seed, weight_stream, static_cast<std::uint64_t>(b));
        return efron_block(m, tilt, exp.target, exp.epsilon, count, rng);
      });
    } else {
      std::vector<std::size_t> symbols;
      for (std::size_t i = 0; i < s; ++i) {
        symbols.insert(symbols.end(), static_cast<std::size_t>(comp[i]), i);
      }
      acc = run_blocks(exp.replications, workers, [&](std::int64_t b, std::int64_t count) {
        Rng rng = Rng::stream(exp.seed, weight_stream, static_cast<std::uint64_t>(b));
        Accumulator a;
        for (std::int64_t r = 0; r < count; ++r) {
          const auto w = sample_weights(exp.scheme, n, rng);
          const bool hit = tv_distance(weighted_empirical(w, symbols, s), exp.target) < exp.epsilon;
          a.add(hit, 1.0);
        }
        return a;
      });
    }
    est.points.push_back(summarize(acc, shift, n, speed_of(exp, n)));
  }
  finish(est, exp);
  return est;
}

RateEstimate run_unconditional_ldp(const LdpExperiment& exp, int workers) {
  validate(exp);
  if (exp.observations != ObservationKind::iid) {
    throw ConfigError("run_unconditional_ldp: observations must be iid");
  }
  RateEstimate est;
  const std::size_t s = exp.mu.alphabet_size();
  const auto* efron = std::get_if<MOutOfN>(&exp.scheme);

  // Observation tilt for the two-stage importance sampler.
  std::vector<double> zeta;
  std::vector<double> obs_log_ratio(s, 0.0);
  if (exp.estimator == EstimatorKind::tilted) {
    const double lambda = efron->lambda;
    const auto best = rate_unconditional(
        exp.target, EntropyTo{exp.mu},
        [lambda](const FiniteMeasure& nu, const FiniteMeasure& z) {
          return rate_efron(nu, z, lambda);
        });
    if (best.value.is_infinite()) {
      throw DegenerateEstimatorError("tilted estimator: the target has infinite rate");
    }
    zeta = best.argmin.values();
    for (std::size_t i = 0; i < s; ++i) {
      if (exp.mu[i] > 0.0 && zeta[i] == 0.0) {
        throw DegenerateEstimatorError("tilted estimator: observation tilt vanishes on symbol " +
                                       std::to_string(i));
      }
      obs_log_ratio[i] =
          zeta[i] > 0.0 ? (exp.mu[i] > 0.0 ? std::log(exp.mu[i] / zeta[i]) : -kInf) : 0.0;
    }
  }

  for (std::size_t idx = 0; idx < exp.n_values.size(); ++idx) {
    const std::int64_t n = exp.n_values[idx];
    const std::uint64_t weight_stream = 2 * idx + 1;
    const std::uint64_t obs_stream = 2 * idx + 2;
    const auto nd = static_cast<double>(n);
    Accumulator acc;
    double shift = 0.0;
    if (efron != nullptr && exp.estimator == EstimatorKind::tilted) {
      const std::int64_t m = resample_size(*efron, n);
      const auto md = static_cast<double>(m);
      const FiniteMeasure zm(zeta);
      shift = nd * relative_entropy(zm, exp.mu).value() +
              md * relative_entropy(exp.target, zm).value();
      acc = run_blocks(exp.replications, workers, [&](std::int64_t b, std::int64_t count) {
        Rng wrng = Rng::stream(exp.seed, weight_stream, static_cast<std::uint64_t>(b));
        Rng orng = Rng::stream(exp.seed, obs_stream, static_cast<std::uint64_t>(b));
        Accumulator a;
        std::vector<double> q(s);
        std::vector<double> L(s);
        for (std::int64_t r = 0; r < count; ++r) {
          const auto C = sample_multinomial(orng, n, zeta);
          double log_lr = shift;
          double q_total = 0.0;
          for (std::size_t i = 0; i < s; ++i) {
            if (C[i] > 0) log_lr += static_cast<double>(C[i]) * obs_log_ratio[i];
            if (C[i] > 0 && exp.target[i] == 0.0) {
              throw DegenerateEstimatorError(
                  "tilted estimator: weight tilt vanishes on an observed symbol");
            }
            q[i] = C[i] > 0 ? static_cast<double>(C[i]) / nd * exp.target[i] / zeta[i] : 0.0;
            q_total += q[i];
          }
          if (!(q_total > 0.0) || !std::isfinite(log_lr)) {
            a.add(false, 0.0);
            continue;
          }
          for (double& v : q) v /= q_total;
          const auto N = sample_multinomial(wrng, m, q);
          for (std::size_t i = 0; i < s; ++i) {
            L[i] = static_cast<double>(N[i]) / md;
            if (N[i] > 0) {
              const double p = static_cast<double>(C[i]) / nd;
              log_lr += static_cast<double>(N[i]) * (std::log(p) - std::log(q[i]));
            }
          }
          const bool hit = tv_to(L, exp.target) < exp.epsilon;
          a.add(hit, hit ? std::exp(log_lr) : 0.0);
        }
        return a;
      });
    } else if (efron != nullptr) {
      const std::int64_t m = resample_size(*efron, n);
      acc = run_blocks(exp.replications, workers, [&](std::int64_t b, std::int64_t count) {
        Rng wrng = Rng::stream(exp.seed, weight_stream, static_cast<std::uint64_t>(b));
        Rng orng = Rng::stream(exp.seed, obs_stream, static_cast<std::uint64_t>(b));
        Accumulator a;
        std::vector<double> counts(s);
        std::vector<double> L(s);
        for (std::int64_t r = 0; r < count; ++r) {
          const auto C = sample_multinomial(orng, n, exp.mu.mass());
          for (std::size_t i = 0; i < s; ++i) counts[i] = static_cast<double>(C[i]);
          const auto N = sample_multinomial(wrng, m, counts);
          for (std::size_t i = 0; i < s; ++i) {
            L[i] = static_cast<double>(N[i]) / static_cast<double>(m);
          }
          a.add(tv_to(L, exp.target) < exp.epsilon, 1.0);
        }
        return a;
      });
    } else {
      const ObservationMode mode = IidObservations{exp.mu};
      acc = run_blocks(exp.replications, workers, [&](std::int64_t b, std::int64_t count) {
        Rng wrng = Rng::stream(exp.seed, weight_stream, static_cast<std::uint64_t>(b));
        Rng orng = Rng::stream(exp.seed, obs_stream, static_cast<std::uint64_t>(b));
        Accumulator a;
        for (std::int64_t r = 0; r < count; ++r) {
          const auto x = sample_observations(mode, n, orng);
          const auto w = sample_weights(exp.scheme, n, wrng);
          a.add(tv_distance(weighted_empirical(w, x, s), exp.target) < exp.epsilon, 1.0);
        }
        return a;
      });
    }
    est.points.push_back(summarize(acc, shift, n, speed_of(exp, n)));
  }
  finish(est, exp);
  return est;
}

RateEstimate run_ldp(const LdpExperiment& exp, int workers) {
  return exp.observations == ObservationKind::iid ? run_unconditional_ldp(exp, workers)
                                                  : run_conditional_ldp(exp, workers);
}

double ball_infimum(const std::function<ExtendedReal(const FiniteMeasure&)>& rate,
                    const FiniteMeasure& center, double epsilon, const FiniteMeasure& minimizer) {
  if (!(epsilon > 0.0)) throw DomainError("ball_infimum: epsilon must be positive");
  const double d = tv_distance(minimizer, center);
  auto f = [&](double t) { return rate(mix(t, minimizer, center)).value(); };
  if (d == 0.0) return f(0.0);
  const double t_max = std::min(1.0, epsilon / d);
  double a = 0.0;
  double b = t_max;
  double best = std::min(f(a), f(b));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-12) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
    best = std::min({best, f1, f2});
  }
  return best;
}

double analytic_ball_infimum(const LdpExperiment& exp) {
  validate(exp);
  std::function<ExtendedReal(const FiniteMeasure&)> rate;
  if (exp.observations == ObservationKind::fixed_composition) {
    const ConditionalRateFn cond = conditional_rate_for(exp.scheme);
    rate = [cond, mu = exp.mu](const FiniteMeasure& nu) { return cond(nu, mu); };
  } else if (const auto* jack = std::get_if<DeleteH>(&exp.scheme)) {
    rate = [alpha = jack->alpha, mu = exp.mu](const FiniteMeasure& nu) {
      return rate_jackknife_unconditional(nu, EntropyTo{mu}, alpha).value;
    };
  } else {
    const ConditionalRateFn cond = conditional_rate_for(exp.scheme);
    rate = [cond, mu = exp.mu](const FiniteMeasure& nu) {
      return rate_unconditional(nu, EntropyTo{mu}, cond).value;
    };
  }
  double value = ball_infimum(rate, exp.target, exp.epsilon, exp.mu);
  if (exp.speed == SpeedKind::m) value /= std::get<MOutOfN>(exp.scheme).lambda;
  return value;
}

}  // namespace ldboot
