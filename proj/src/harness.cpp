#include "projridge/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "projridge/baselines.hpp"
#include "projridge/error.hpp"
#include "projridge/ridge.hpp"
#include "projridge/rng.hpp"
#include "projridge/tuning.hpp"

namespace projridge {

std::string to_string(Method m) {
  switch (m) {
    case Method::thresholded_ridge: return "thresholded_ridge";
    case Method::ridge: return "ridge";
    case Method::lasso: return "lasso";
    case Method::enet: return "enet";
  }
  return "ridge";
}

Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (to_string(m) == s) return m;
  throw input_error("unknown method '" + s + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> kAll{Method::thresholded_ridge, Method::lasso, Method::enet, Method::ridge};
  return kAll;
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t fold_seed(std::uint64_t master_seed, std::uint64_t replication) {
  return rng::Stream(master_seed, rng::Purpose::folds, replication + 1).next_u64();
}

std::vector<double> cumulative_proportion(const Vector& theta) {
  std::vector<double> sq(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index j = 0; j < theta.size(); ++j) sq[j] = theta(j) * theta(j);
  std::sort(sq.begin(), sq.end(), std::greater<>());
  const double total = std::accumulate(sq.begin(), sq.end(), 0.0);
  if (!(total > 0.0)) throw input_error("undefined proportion: theta is zero");
  std::vector<double> out(sq.size());
  double running = 0.0;
  for (std::size_t k = 0; k < sq.size(); ++k) {
    running += sq[k];
    out[k] = running / total;
  }
  return out;
}

namespace {

double l2_error(const DesignMatrix& X, const Vector& beta, const Vector& estimate) {
  return (X.entries() * (beta - estimate)).squaredNorm() / static_cast<double>(X.n());
}

ReplicationResult run_method(Method method, const GeneratedInstance& inst, const Vector& y, std::uint64_t folds_seed,
                             const RunOptions& opts) {
  ReplicationResult rr;
  rr.method = method;
  const Matrix& X = inst.X.entries();
  const long n = static_cast<long>(inst.X.n());
  const long p = static_cast<long>(inst.X.p());
  switch (method) {
    case Method::thresholded_ridge: {
      const TuningGrid grid = default_grid(inst.F, y, opts.alpha);
      const CvResult cv = tune(inst.F, y, grid);
      ScheduleParams s = grid.schedule;
      s.C1 = cv.best_c1;
      s.C2 = cv.best_c2;
      const double a = threshold_value(n, s);
      const double h = regularization_value(n, p, s);
      const ThresholdedFit tf = apply_threshold(fit_ridge(inst.F, y, h), a);
      rr.l2_error = l2_error(inst.X, inst.beta, tf.theta_tilde);
      rr.selected_count = static_cast<long>(tf.selected.size());
      rr.band_check = selection_band_check(inst.theta, tf, sparsity_profile(inst.theta, n, a));
      rr.tuning1 = cv.best_c1;
      rr.tuning2 = cv.best_c2;
      break;
    }
    case Method::ridge: {
      const double lmax = spectral_diagnostics(inst.F).lambda_max;
      const RidgeKfoldResult cv =
          tune_ridge_kfold(X, y, ridge_h_grid(lmax, opts.ridge_grid_points), folds_seed, opts.folds);
      rr.l2_error = l2_error(inst.X, inst.beta, fit_ridge(inst.F, y, cv.best_h).theta_hat);
      rr.tuning1 = cv.best_h;
      break;
    }
    case Method::lasso:
    case Method::enet: {
      PenaltyConfig base;
      base.tol = opts.cd_tol;
      base.max_iter = opts.cd_max_iter;
      const std::vector<double> path = lambda_path(X, y, opts.lasso_path_points, opts.lasso_path_ratio);
      const std::vector<double> l2grid = method == Method::lasso ? std::vector<double>{0.0} : opts.enet_lambda2;
      const KfoldResult cv = tune_kfold(X, y, path, l2grid, folds_seed, opts.folds, base);
      const CdResult fit = fit_enet(X, y, cv.best);
      if (!fit.converged) throw numerical_error("coordinate descent did not converge on the full data");
      rr.l2_error = l2_error(inst.X, inst.beta, fit.coef);
      rr.tuning1 = cv.best.lambda;
      rr.tuning2 = cv.best.lambda2;
      rr.kkt = kkt_violation(X, y, fit.coef, cv.best.lambda, cv.best.lambda2);
      break;
    }
  }
  if (!std::isfinite(rr.l2_error)) throw numerical_error("non-finite L2 error");
  rr.ok = true;
  return rr;
}

}  // namespace

StudyReport run_study(const StudyConfig& cfg, const std::vector<Method>& methods, const RunOptions& opts) {
  const GeneratedInstance inst = make_instance(cfg);

  StudyReport rep;
  rep.config = cfg;
  rep.methods = methods;
  rep.options = opts;
  rep.design_label = inst.design_label;
  rep.warnings = inst.warnings;
  rep.rank = inst.F.rank();
  rep.beta_norm = inst.beta.norm();
  rep.theta_norm = inst.theta.norm();
  if (rep.theta_norm > 0.0) rep.cumulative = cumulative_proportion(inst.theta);
  rep.results.assign(methods.size(), std::vector<ReplicationResult>(static_cast<std::size_t>(cfg.replications)));

  const Vector signal = inst.X.entries() * inst.beta;
  auto run_one = [&](long r) {
    const auto ur = static_cast<std::uint64_t>(r);
    // A failing noise hook fails every cell of this replication.
    std::optional<Vector> y;
    std::string noise_error;
    try {
      const Vector noise = opts.noise ? opts.noise(cfg.n, cfg.sigma, cfg.master_seed, ur)
                                      : gen_noise(cfg.n, cfg.sigma, cfg.master_seed, ur);
      if (noise.size() != signal.size()) throw input_error("noise hook returned a vector of the wrong length");
      y = signal + noise;
    } catch (const std::exception& e) {
      noise_error = e.what();
    }
    const std::uint64_t fs = fold_seed(cfg.master_seed, ur);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      ReplicationResult rr;
      try {
        if (!y) throw numerical_error(noise_error);
        rr = run_method(methods[m], inst, *y, fs, opts);
      } catch (const std::exception& e) {
        rr = ReplicationResult{};
        rr.method = methods[m];
        rr.ok = false;
        rr.error = e.what();
      }
      rr.replication = r;
      rep.results[m][static_cast<std::size_t>(r)] = std::move(rr);
    }
  };

  const unsigned workers = std::min<unsigned>(resolve_workers(opts.workers), static_cast<unsigned>(cfg.replications));
  if (workers <= 1) {
    for (long r = 0; r < cfg.replications; ++r) run_one(r);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (long r = next++; r < cfg.replications; r = next++) run_one(r);
      });
    for (auto& t : pool) t.join();
  }

  for (const auto& per_method : rep.results) {
    double sum = 0.0;
    long ok = 0;
    for (const auto& rr : per_method)
      if (rr.ok) {
        sum += rr.l2_error;
        ++ok;
      }
    rep.mean_l2.push_back(ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN());
    rep.failures.push_back(static_cast<long>(per_method.size()) - ok);
  }
  return rep;
}

// ---- rate checks -------------------------------------------------------------

std::string to_string(Theorem t) { return t == Theorem::t1ii ? "t1ii" : "t3"; }

Theorem parse_theorem(const std::string& s) {
  if (s == "t1ii") return Theorem::t1ii;
  if (s == "t3") return Theorem::t3;
  throw input_error("unknown theorem '" + s + "' (expected t1ii or t3)");
}

std::vector<std::string> rate_scenario_names() { return {"orthogonal", "bounded-q"}; }

RateScenario rate_scenario(const std::string& name) {
  RateScenario s;
  s.name = name;
  if (name == "orthogonal") {
    s.description = "X = sqrt(n)[I_n | 0], p = 2n, theta = e_1, sigma = 1, h = 1";
    s.fixed_h = 1.0;
    s.schedule.C1 = 1.0;
    s.schedule.alpha = 0.25;
    s.predicted_ridge_slope = 0.0;
    s.predicted_thresholded_slope = -1.0;
  } else if (name == "bounded-q") {
    s.description =
        "block-orthogonal X with p = 4n, theta = 1 on a 5-column block, sigma = 1, "
        "gaussian schedule C1 = 1, alpha = 1/4, C2 = 0.01";
    s.schedule.C1 = 1.0;
    s.schedule.alpha = 0.25;
    s.schedule.C2 = 0.01;
    s.predicted_ridge_slope = 0.0;
    s.predicted_thresholded_slope = -1.0;
  } else {
    throw input_error("unknown rate-check scenario '" + name + "'");
  }
  return s;
}

double loglog_slope(const std::vector<long>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw input_error("slope needs matching vectors of length >= 2");
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw numerical_error("log-log slope needs positive values");
    mx += std::log(static_cast<double>(x[i]));
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(static_cast<double>(x[i])) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

struct RateInstance {
  DesignMatrix X;
  SvdFactorization F;
  Vector theta;
};

constexpr long kRateBlock = 5;

RateInstance rate_instance(const std::string& scenario, long n, std::uint64_t seed) {
  if (scenario == "orthogonal") {
    const long p = 2 * n;
    Matrix X = Matrix::Zero(n, p);
    X.leftCols(n) = std::sqrt(static_cast<double>(n)) * Matrix::Identity(n, n);
    DesignMatrix D(std::move(X));
    SvdFactorization F = factorize(D);
    Vector theta = Vector::Unit(p, 0);
    return {std::move(D), std::move(F), std::move(theta)};
  }
  const long p = 4 * n;
  const std::uint64_t design_seed = rng::Stream(seed, rng::Purpose::design, static_cast<std::uint64_t>(n)).next_u64();
  DesignMatrix D = gen_block_orthogonal(n, p, kRateBlock, design_seed);
  SvdFactorization F = factorize(D);
  Vector beta = Vector::Zero(p);
  beta.head(kRateBlock).setOnes();
  Vector theta = project(beta, F);
  return {std::move(D), std::move(F), std::move(theta)};
}

}  // namespace

RateCheckReport rate_check(Theorem theorem, const std::string& scenario, const std::vector<long>& n_values,
                           std::uint64_t seed, long replications) {
  const RateScenario sc = rate_scenario(scenario);
  if (n_values.size() < 4) throw input_error("rate check needs at least 4 values of n");
  if (!std::is_sorted(n_values.begin(), n_values.end()) ||
      std::adjacent_find(n_values.begin(), n_values.end()) != n_values.end())
    throw input_error("n values must be strictly ascending");
  if (n_values.front() < kMinScheduleN) throw input_error("rate check needs n >= 16");
  if (theorem == Theorem::t3 && replications < 500) throw input_error("thresholded rate check needs >= 500 replications");

  RateCheckReport rep;
  rep.theorem = theorem;
  rep.scenario = scenario;
  rep.n_values = n_values;
  rep.replications = theorem == Theorem::t3 ? replications : 0;
  rep.predicted_ridge_slope = sc.predicted_ridge_slope;
  rep.predicted_thresholded_slope = sc.predicted_thresholded_slope;

  for (std::size_t idx = 0; idx < n_values.size(); ++idx) {
    const long n = n_values[idx];
    const RateInstance inst = rate_instance(scenario, n, seed);
    if (!(inst.theta.norm() > 0.0)) throw input_error("degenerate scenario: theta = 0");
    const long p = static_cast<long>(inst.X.p());
    const double a = threshold_value(n, sc.schedule);
    const double h = sc.fixed_h > 0.0 ? sc.fixed_h : regularization_value(n, p, sc.schedule);
    rep.a_values.push_back(a);
    rep.h_values.push_back(h);
    rep.ridge_error.push_back(expected_l2_error(inst.F, inst.theta, h, sc.sigma));

    if (theorem != Theorem::t3) continue;
    const Vector signal = inst.X.entries() * inst.theta;
    const Vector d2 = inst.F.d().array().square();
    const Vector gain = (inst.F.d().array() / (d2.array() + h)).matrix();
    double sum = 0.0, sumsq = 0.0;
    Vector theta_tilde(p);
    for (long r = 0; r < replications; ++r) {
      rng::Stream s(seed, rng::Purpose::ratecheck_noise, (static_cast<std::uint64_t>(idx) << 32) | static_cast<std::uint64_t>(r));
      Vector y = signal;
      for (long i = 0; i < n; ++i) y(i) += sc.sigma * s.normal();
      const Vector theta_hat = inst.F.Q() * gain.cwiseProduct(inst.F.P().transpose() * y);
      for (long j = 0; j < p; ++j) theta_tilde(j) = std::fabs(theta_hat(j)) > a ? theta_hat(j) : 0.0;
      const double e = (inst.X.entries() * (theta_tilde - inst.theta)).squaredNorm() / static_cast<double>(n);
      sum += e;
      sumsq += e * e;
    }
    const double mean = sum / static_cast<double>(replications);
    const double var = std::max(0.0, (sumsq - sum * mean) / static_cast<double>(replications - 1));
    rep.thresholded_error.push_back(mean);
    rep.thresholded_se.push_back(std::sqrt(var / static_cast<double>(replications)));
  }

  rep.ridge_slope = loglog_slope(n_values, rep.ridge_error);
  if (theorem == Theorem::t3) {
    rep.thresholded_slope = loglog_slope(n_values, rep.thresholded_error);
    // Monte-Carlo standard error of the slope by the delta method.
    double mx = 0.0;
    for (long n : n_values) mx += std::log(static_cast<double>(n));
    mx /= static_cast<double>(n_values.size());
    double sxx = 0.0;
    for (long n : n_values) sxx += std::pow(std::log(static_cast<double>(n)) - mx, 2);
    double v = 0.0;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      const double w = (std::log(static_cast<double>(n_values[i])) - mx) / sxx;
      const double rel = rep.thresholded_se[i] / rep.thresholded_error[i];
      v += w * w * rel * rel;
    }
    rep.thresholded_slope_se = std::sqrt(v);
  }
  return rep;
}

// ---- selection band ------------------------------------------------------------

StudyConfig band_preset() {
  StudyConfig c;
  c.study = StudyId::custom;
  c.n = 200;
  c.p = 1000;
  c.sigma = 1.0;
  c.design_source.kind = DesignKind::block_orthogonal;
  c.design_source.block = 5;
  for (long j = 1; j <= 5; ++j) c.beta_spec.push_back({j, 1.0});
  c.master_seed = 9;
  c.replications = 200;
  return c;
}

ScheduleParams band_schedule() {
  ScheduleParams s;
  s.C1 = 1.0;
  s.alpha = 0.5;
  s.C2 = 0.01;
  return s;
}

BandFrequencyReport selection_band_frequency(const StudyConfig& cfg, const ScheduleParams& s) {
  const GeneratedInstance inst = make_instance(cfg);
  const long n = cfg.n;
  BandFrequencyReport rep;
  rep.replications = cfg.replications;
  rep.a = threshold_value(n, s);
  rep.h = regularization_value(n, cfg.p, s);
  rep.profile = sparsity_profile(inst.theta, n, rep.a);
  rep.min_large = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < inst.theta.size(); ++j) {
    const double v = std::fabs(inst.theta(j));
    if (v > rep.a) rep.min_large = std::min(rep.min_large, v);
    else rep.max_small = std::max(rep.max_small, v);
  }
  const IndexSet target = index_set(inst.theta, rep.a);
  const Vector signal = inst.X.entries() * inst.beta;
  for (long r = 0; r < cfg.replications; ++r) {
    const Vector y = signal + gen_noise(n, cfg.sigma, cfg.master_seed, static_cast<std::uint64_t>(r));
    const ThresholdedFit tf = apply_threshold(fit_ridge(inst.F, y, rep.h), rep.a);
    const BandCheck bc = selection_band_check(inst.theta, tf, rep.profile);
    if (!bc.lower_ok) ++rep.lower_fail;
    if (!bc.upper_ok) ++rep.upper_fail;
    if (bc.lower_ok && bc.upper_ok) {
      ++rep.both_ok;
      if (rep.profile.q_plus == rep.profile.q_minus) {
        ++rep.consistency_events;
        if (tf.selected != target) ++rep.implication_failures;
      }
    }
  }
  rep.frequency = static_cast<double>(rep.both_ok) / static_cast<double>(rep.replications);
  return rep;
}

}  // namespace projridge
