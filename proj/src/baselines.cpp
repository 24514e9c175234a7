#include "projridge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>

#include "projridge/error.hpp"
#include "projridge/kernels.hpp"
#include "projridge/ridge.hpp"
#include "projridge/rng.hpp"

namespace projridge {

namespace {

constexpr long kSupportSolveEvery = 8;

inline std::span<const double> col_span(const Matrix& X, Eigen::Index j) {
  return {X.col(j).data(), static_cast<std::size_t>(X.rows())};
}

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double objective_from_residual(const Vector& r, const Vector& b, double lambda, double lambda2) {
  const double n = static_cast<double>(r.size());
  return 0.5 / n * r.squaredNorm() + lambda * b.lpNorm<1>() + 0.5 * lambda2 * b.squaredNorm();
}

double kkt_from_residual(const Matrix& X, const Vector& r, const Vector& b, double lambda, double lambda2) {
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  const std::span<const double> rs(r.data(), static_cast<std::size_t>(r.size()));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double g = kernels::dot(col_span(X, j), rs) * inv_n - lambda2 * b(j);
    const double v = b(j) == 0.0 ? std::max(0.0, std::fabs(g) - lambda)
                                 : std::fabs(g - lambda * (b(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

void check_xy(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw input_error("dimension mismatch: X rows vs y length");
  if (X.rows() < 1 || X.cols() < 1) throw input_error("empty design");
  if (!y.allFinite() || !X.allFinite()) throw input_error("non-finite data");
}

}  // namespace

void PenaltyConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw input_error("lambda must be nonnegative");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw input_error("lambda2 must be nonnegative");
  if (!(tol > 0.0)) throw input_error("tol must be positive");
  if (max_iter < 1) throw input_error("max_iter must be positive");
}

double enet_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda, double lambda2) {
  return objective_from_residual(y - X * b, b, lambda, lambda2);
}

double kkt_violation(const Matrix& X, const Vector& y, const Vector& b, double lambda, double lambda2) {
  return kkt_from_residual(X, y - X * b, b, lambda, lambda2);
}

CdResult fit_enet(const Matrix& X, const Vector& y, const PenaltyConfig& cfg, const Vector* warm_start) {
  cfg.validate();
  check_xy(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> col_sq(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = kernels::sum_squares(col_span(X, j)) * inv_n;

  CdResult res;
  res.coef = warm_start ? *warm_start : Vector::Zero(p);
  if (res.coef.size() != p) throw input_error("warm start has the wrong length");
  Vector r = y - X * res.coef;
  const std::span<double> rs(r.data(), static_cast<std::size_t>(n));

  auto update = [&](Eigen::Index j) -> double {
    const double denom = col_sq[j] + cfg.lambda2;
    const double old = res.coef(j);
    double next = 0.0;
    if (denom > 0.0) {
      const double z = kernels::dot(col_span(X, j), rs) * inv_n + col_sq[j] * old;
      next = soft_threshold(z, cfg.lambda) / denom;
    }
    const double delta = next - old;
    if (delta != 0.0) {
      kernels::axpy(-delta, col_span(X, j), rs);
      res.coef(j) = next;
    }
    return std::fabs(delta);
  };
  auto record = [&] {
    if (cfg.record_objective) res.objective_trace.push_back(objective_from_residual(r, res.coef, cfg.lambda, cfg.lambda2));
  };

  // Descent step on the current support. On the orthant face fixed by the
  // current signs the objective is the quadratic ½b′Gb − c′b; we move along
  // the (Newton, or slightly regularized Newton when G is singular)
  // direction with an exact line search, stop at the first zero crossing,
  // drop the crossing coordinate and repeat. Every step stays on the closed
  // face, so the objective never increases.
  std::vector<Eigen::Index> active;
  auto support_solve = [&] {
    std::vector<Eigen::Index> S = active;
    Vector b = res.coef;
    bool moved = false;
    for (int round = 0; round < 4 * static_cast<int>(active.size()) + 4 && !S.empty(); ++round) {
      const auto k = static_cast<Eigen::Index>(S.size());
      const Matrix XS = X(Eigen::all, S);
      Matrix G = XS.transpose() * XS * inv_n;
      G.diagonal().array() += cfg.lambda2;
      Vector c = XS.transpose() * y * inv_n;
      Vector bS(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        bS(i) = b(S[i]);
        c(i) -= cfg.lambda * (bS(i) > 0.0 ? 1.0 : -1.0);
      }
      const Vector grad = G * bS - c;
      const double scale = G.diagonal().maxCoeff();
      Eigen::LDLT<Matrix> ldlt(G);
      if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12 * scale).all())
        ldlt.compute(G + Matrix::Identity(k, k) * (1e-10 * scale));
      if (ldlt.info() != Eigen::Success) break;
      const Vector dir = -ldlt.solve(grad);
      const double slope = grad.dot(dir);
      if (!dir.allFinite() || !(slope < 0.0)) break;
      const double curv = dir.dot(G * dir);
      double t = curv > 0.0 ? -slope / curv : std::numeric_limits<double>::infinity();
      Eigen::Index hit = -1;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (dir(i) != 0.0 && (dir(i) > 0.0) != (bS(i) > 0.0)) {
          const double ti = -bS(i) / dir(i);
          if (ti <= t) {
            t = ti;
            hit = i;
          }
        }
      }
      if (!std::isfinite(t)) break;
      for (Eigen::Index i = 0; i < k; ++i) b(S[i]) = bS(i) + t * dir(i);
      moved = true;
      if (hit < 0) break;
      b(S[hit]) = 0.0;
      std::erase_if(S, [&](Eigen::Index j) { return b(j) == 0.0 || (b(j) > 0.0) != (res.coef(j) > 0.0); });
    }
    if (!moved) return;
    for (Eigen::Index j : active)
      if (b(j) != 0.0 && (b(j) > 0.0) != (res.coef(j) > 0.0)) b(j) = 0.0;
    const Vector trial_r = y - X * b;
    if (objective_from_residual(trial_r, b, cfg.lambda, cfg.lambda2) >
        objective_from_residual(r, res.coef, cfg.lambda, cfg.lambda2))
      return;
    res.coef = std::move(b);
    r = trial_r;
  };

  while (res.cycles < cfg.max_iter) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
    ++res.cycles;
    record();
    if (change < cfg.tol) {
      if (kkt_from_residual(X, r, res.coef, cfg.lambda, cfg.lambda2) <= cfg.tol) {
        res.converged = true;
        break;
      }
      continue;
    }
    // Sweep the current support until it settles, then re-check everything.
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j)
      if (res.coef(j) != 0.0) active.push_back(j);
    long sweeps = 0;
    while (res.cycles < cfg.max_iter) {
      if (sweeps++ % kSupportSolveEvery == 0) support_solve();
      double achange = 0.0;
      for (Eigen::Index j : active) achange = std::max(achange, update(j));
      ++res.cycles;
      record();
      if (achange < cfg.tol) break;
    }
  }
  return res;
}

CdResult fit_lasso(const Matrix& X, const Vector& y, const PenaltyConfig& cfg, const Vector* warm_start) {
  if (cfg.lambda2 != 0.0) throw input_error("fit_lasso requires lambda2 = 0");
  return fit_enet(X, y, cfg, warm_start);
}

double lambda_max(const Matrix& X, const Vector& y) {
  check_xy(X, y);
  // Same arithmetic as the first coordinate update from b = 0, so that
  // λ = lambda_max reproduces the all-zero solution exactly.
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
  double top = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) top = std::max(top, std::fabs(kernels::dot(col_span(X, j), ys) * inv_n));
  return top;
}

std::vector<double> lambda_path(const Matrix& X, const Vector& y, int count, double ratio) {
  if (count < 1 || !(ratio >= 1.0)) throw input_error("invalid lambda path specification");
  const double top = lambda_max(X, y);
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out.push_back(top * std::pow(ratio, -frac));
  }
  return out;
}

FoldAssignment make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2 || n < k) throw input_error("need at least k >= 2 observations per fold assignment");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  rng::Stream stream(seed, rng::Purpose::folds, 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[stream.below(i + 1)]);
  FoldAssignment fa;
  fa.seed = seed;
  fa.fold_of.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 0; pos < perm.size(); ++pos) fa.fold_of[perm[pos]] = static_cast<int>(pos % k) + 1;
  return fa;
}

namespace {

struct Split {
  Matrix X_train, X_test;
  Vector y_train, y_test;
};

Split split_fold(const Matrix& X, const Vector& y, const FoldAssignment& fa, int fold) {
  std::vector<Eigen::Index> tr, te;
  for (std::size_t i = 0; i < fa.fold_of.size(); ++i) (fa.fold_of[i] == fold ? te : tr).push_back(static_cast<Eigen::Index>(i));
  return {X(tr, Eigen::all), X(te, Eigen::all), y(tr), y(te)};
}

}  // namespace

KfoldResult tune_kfold(const Matrix& X, const Vector& y, const std::vector<double>& lambda_grid,
                       const std::vector<double>& lambda2_grid, std::uint64_t seed, int folds,
                       const PenaltyConfig& base) {
  check_xy(X, y);
  if (lambda_grid.empty() || lambda2_grid.empty()) throw input_error("tuning grids must be nonempty");
  const auto L1 = static_cast<Eigen::Index>(lambda_grid.size());
  const auto L2 = static_cast<Eigen::Index>(lambda2_grid.size());
  Matrix sse = Matrix::Zero(L1, L2);
  std::vector<char> failed(static_cast<std::size_t>(L1 * L2), 0);

  const FoldAssignment fa = make_folds(X.rows(), folds, seed);
  for (int f = 1; f <= folds; ++f) {
    const Split s = split_fold(X, y, fa, f);
    // Repeated grid points reuse the first evaluation, so duplicates tie
    // exactly and the first occurrence wins.
    std::map<std::pair<double, double>, std::optional<double>> seen;
    for (Eigen::Index c = 0; c < L2; ++c) {
      Vector warm = Vector::Zero(X.cols());
      for (Eigen::Index a = 0; a < L1; ++a) {
        const std::pair<double, double> key{lambda_grid[a], lambda2_grid[c]};
        std::optional<double> held_out;
        if (const auto it = seen.find(key); it != seen.end()) {
          held_out = it->second;
        } else {
          PenaltyConfig cfg = base;
          cfg.lambda = key.first;
          cfg.lambda2 = key.second;
          cfg.record_objective = false;
          const CdResult fit = fit_enet(s.X_train, s.y_train, cfg, &warm);
          if (fit.converged) {
            warm = fit.coef;
            held_out = (s.y_test - s.X_test * fit.coef).squaredNorm();
          }
          seen.emplace(key, held_out);
        }
        if (held_out) sse(a, c) += *held_out;
        else failed[a * L2 + c] = 1;
      }
    }
  }

  KfoldResult out;
  out.cv_error = Matrix::Constant(L1, L2, std::numeric_limits<double>::quiet_NaN());
  bool found = false;
  double best = 0.0;
  for (Eigen::Index a = 0; a < L1; ++a) {
    for (Eigen::Index c = 0; c < L2; ++c) {
      if (failed[a * L2 + c]) continue;
      const double e = sse(a, c) / static_cast<double>(X.rows());
      out.cv_error(a, c) = e;
      if (!found || e < best) {
        found = true;
        best = e;
        out.best = base;
        out.best.lambda = lambda_grid[a];
        out.best.lambda2 = lambda2_grid[c];
      }
    }
  }
  if (!found) throw numerical_error("no admissible tuning point");
  out.best.record_objective = false;
  return out;
}

std::vector<double> ridge_h_grid(double lambda_max_xtx, int count, double lo_factor, double hi_factor) {
  if (!(lambda_max_xtx > 0.0) || count < 1) throw input_error("invalid ridge grid specification");
  std::vector<double> out;
  const double lo = std::log(lo_factor * lambda_max_xtx);
  const double hi = std::log(hi_factor * lambda_max_xtx);
  for (int k = 0; k < count; ++k) out.push_back(std::exp(count == 1 ? lo : lo + (hi - lo) * k / (count - 1)));
  return out;
}

RidgeKfoldResult tune_ridge_kfold(const Matrix& X, const Vector& y, const std::vector<double>& h_grid,
                                  std::uint64_t seed, int folds) {
  check_xy(X, y);
  if (h_grid.empty()) throw input_error("h grid must be nonempty");
  RidgeKfoldResult out;
  out.cv_error.assign(h_grid.size(), 0.0);
  const FoldAssignment fa = make_folds(X.rows(), folds, seed);
  for (int f = 1; f <= folds; ++f) {
    const Split s = split_fold(X, y, fa, f);
    const SvdFactorization F = factorize(DesignMatrix(s.X_train));
    const Matrix XteQ = s.X_test * F.Q();
    const Vector Pty = F.P().transpose() * s.y_train;
    const Vector d2 = F.d().array().square();
    for (std::size_t k = 0; k < h_grid.size(); ++k) {
      const Vector coef = (F.d().array() / (d2.array() + h_grid[k]) * Pty.array()).matrix();
      out.cv_error[k] += (s.y_test - XteQ * coef).squaredNorm();
    }
  }
  for (double& e : out.cv_error) e /= static_cast<double>(X.rows());
  const auto it = std::min_element(out.cv_error.begin(), out.cv_error.end());
  out.best_h = h_grid[static_cast<std::size_t>(it - out.cv_error.begin())];
  return out;
}

}  // namespace projridge
