#include "doctest.h"

#include <cmath>

#include "projridge/error.hpp"
#include "projridge/ridge.hpp"
#include "projridge/simgen.hpp"
#include "projridge/threshold.hpp"
#include "test_support.hpp"

using namespace projridge;
using testing::gaussian_vector;

namespace {

RidgeFit fake_fit(const Vector& theta_hat) {
  RidgeFit f;
  f.theta_hat = theta_hat;
  f.h = 1.0;
  f.leverages = Vector::Zero(1);
  return f;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("threshold schedule") {
  ScheduleParams s;
  s.C1 = 1.0;
  s.alpha = 0.5;
  CHECK(threshold_value(100, s) == doctest::Approx(0.1).epsilon(1e-15));
  s.C1 = 2.0;
  CHECK(threshold_value(4, s) == doctest::Approx(1.0).epsilon(1e-15));
  s.alpha = 0.0;
  CHECK_THROWS_AS(threshold_value(4, s), input_error);
  s.alpha = 0.51;
  CHECK_THROWS_AS(threshold_value(4, s), input_error);
  s.alpha = 0.5;
  s.C1 = -1.0;
  CHECK_THROWS_AS(threshold_value(4, s), input_error);
}

TEST_CASE("regularization schedule, gaussian regime") {
  ScheduleParams s;
  s.C1 = 1.0;
  s.alpha = 0.5;
  s.C2 = 1.0;
  const double expected = 100.0 * std::pow(std::log(std::log(100.0)), 3) * std::log(500.0);
  CHECK(regularization_value(100, 500, s) == doctest::Approx(expected).epsilon(1e-14));
  // n ∨ p picks n when n is larger.
  CHECK(regularization_value(100, 20, s) ==
        doctest::Approx(100.0 * std::pow(std::log(std::log(100.0)), 3) * std::log(100.0)).epsilon(1e-14));
  ScheduleParams d = s;
  d.C2 = 2.0;
  CHECK(regularization_value(100, 500, d) == 2.0 * regularization_value(100, 500, s));
  CHECK_THROWS_WITH_AS(regularization_value(15, 500, s), "schedule undefined for tiny n; supply h explicitly",
                       input_error);
  CHECK_NOTHROW(regularization_value(16, 500, s));
}

TEST_CASE("regularization schedule, moment regime") {
  ScheduleParams s;
  s.regime = Regime::moment;
  s.C1 = 1.0;
  s.alpha = 0.25;
  s.C2 = 3.0;
  s.l = 1.5;
  s.k = 12;
  s.t = 0.5;
  const double a = std::pow(200.0, -0.25);
  const double xi = 3.0 * 1.5 * 1.5 / 12.0;
  const double expected = 3.0 / (a * a) * std::pow(std::log(std::log(200.0)), 2) * std::pow(800.0, 2.0 * xi / 4.5);
  CHECK(regularization_value(200, 800, s) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(s.validate().empty());

  SUBCASE("zero-exponent limit t -> -1") {
    const double base = 3.0 / (a * a) * std::pow(std::log(std::log(200.0)), 2);
    double previous = regularization_value(200, 800, s);
    for (double gap : {1e-1, 1e-3, 1e-6, 1e-9}) {
      s.t = -1.0 + gap;
      const double h = regularization_value(200, 800, s);
      CHECK(h < previous);
      previous = h;
    }
    CHECK(previous == doctest::Approx(base).epsilon(1e-8));
    s.t = -1.0;
    CHECK_THROWS_AS(regularization_value(200, 800, s), input_error);
  }
  SUBCASE("soft warnings") {
    s.k = 7;
    s.t = 2.0;
    const auto w = s.validate();
    CHECK(w.size() == 2);  // odd k and 3l(t+1)/k >= 1
    s.k = 100;
    s.t = -0.5;
    CHECK(s.validate().size() == 1);
  }
  SUBCASE("hard errors") {
    s.l = 0.5;
    CHECK_THROWS_AS(s.validate(), input_error);
    s.l = 1.0;
    s.k = 0;
    CHECK_THROWS_AS(s.validate(), input_error);
  }
}

TEST_CASE("hard thresholding examples") {
  SUBCASE("componentwise") {
    const ThresholdedFit t = apply_threshold(fake_fit(vec({0.5, 0.05, -0.3})), 0.1);
    CHECK(t.theta_tilde == vec({0.5, 0.0, -0.3}));
    CHECK(t.selected == IndexSet{0, 2});
    CHECK(t.a == 0.1);
  }
  SUBCASE("ties are zeroed") {
    const ThresholdedFit t = apply_threshold(fake_fit(vec({0.1, -0.1, 0.2})), 0.1);
    CHECK(t.theta_tilde == vec({0.0, 0.0, 0.2}));
    CHECK(t.selected == IndexSet{2});
  }
  SUBCASE("threshold above every component") {
    const ThresholdedFit t = apply_threshold(fake_fit(vec({0.5, -0.3})), 0.6);
    CHECK(t.theta_tilde == Vector::Zero(2));
    CHECK(t.selected.empty());
  }
  SUBCASE("zero threshold keeps every nonzero component") {
    const ThresholdedFit t = apply_threshold(fake_fit(vec({0.5, 0.0, -0.3})), 0.0);
    CHECK(t.selected == IndexSet{0, 2});
  }
  SUBCASE("invalid threshold") {
    CHECK_THROWS_AS(apply_threshold(fake_fit(vec({1.0})), -0.1), input_error);
  }
}

TEST_CASE("index sets") {
  CHECK(index_set(vec({2.0, -1.0, 0.5}), 1.0) == IndexSet{0});
  CHECK(index_set(vec({2.0, -1.0, 0.5}), 0.0) == IndexSet{0, 1, 2});
  CHECK(index_set(Vector::Zero(4), 0.0).empty());
  CHECK(index_set(Vector::Zero(4), 3.0).empty());
  CHECK(is_subset({1, 3}, {0, 1, 2, 3}));
  CHECK_FALSE(is_subset({1, 4}, {0, 1, 2, 3}));
  CHECK(is_subset({}, {}));
}

TEST_CASE("sparsity profile") {
  SUBCASE("direct count and sum") {
    const SparsityProfile sp = sparsity_profile(vec({1.0, 0.01, 0.02}), 1000000, 0.1);
    CHECK(sp.q_n == 1);
    CHECK(sp.q_minus == 1);
    CHECK(sp.q_plus == 1);
    CHECK(sp.v_n == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(sp.u_n == doctest::Approx(1.0 + 1.0 / std::log(std::log(1e6))));
  }
  SUBCASE("no small components") {
    const SparsityProfile sp = sparsity_profile(vec({5.0, -4.0, 3.0}), 100, 0.1);
    CHECK(sp.q_minus == 3);
    CHECK(sp.q_n == 3);
    CHECK(sp.q_plus == 3);
    CHECK(sp.v_n == 0.0);
  }
  SUBCASE("tiny n") {
    CHECK_THROWS_WITH_AS(sparsity_profile(vec({1.0}), 15, 0.1), "schedule undefined for tiny n; supply h explicitly",
                         input_error);
  }
  SUBCASE("study I instance against brute-force summation") {
    const GeneratedInstance inst = make_instance(preset(StudyId::I, 30, 100));
    const double a = 0.05;
    const SparsityProfile sp = sparsity_profile(inst.theta, 30, a);
    double v = 0.0;
    long q = 0;
    for (Eigen::Index j = 0; j < inst.theta.size(); ++j) {
      if (std::fabs(inst.theta(j)) <= a) v += std::fabs(inst.theta(j));
      else ++q;
    }
    CHECK(sp.v_n == doctest::Approx(v).epsilon(1e-13));
    CHECK(sp.q_n == q);
    CHECK(sp.q_minus <= sp.q_n);
    CHECK(sp.q_n <= sp.q_plus);
  }
}

TEST_CASE("band check examples") {
  const Vector theta = vec({3.0, 1.0, 0.0, 0.0});
  const SparsityProfile sp = sparsity_profile(theta, 100, 0.5);
  SUBCASE("perfect estimate") {
    const BandCheck bc = selection_band_check(theta, apply_threshold(fake_fit(theta), 0.5), sp);
    CHECK(bc.lower_ok);
    CHECK(bc.upper_ok);
  }
  SUBCASE("missing a large index") {
    const BandCheck bc = selection_band_check(theta, apply_threshold(fake_fit(vec({0.0, 1.0, 0.0, 0.0})), 0.5), sp);
    CHECK_FALSE(bc.lower_ok);
    CHECK(bc.upper_ok);
  }
  SUBCASE("selecting a null index") {
    const BandCheck bc = selection_band_check(theta, apply_threshold(fake_fit(vec({3.0, 1.0, 0.9, 0.0})), 0.5), sp);
    CHECK(bc.lower_ok);
    CHECK_FALSE(bc.upper_ok);
  }
}

TEST_CASE("properties over random inputs") {
  auto s = testing::stream(301);
  for (int rep = 0; rep < 200; ++rep) {
    const long p = testing::uniform_int(s, 1, 60);
    const Vector theta_hat = gaussian_vector(s, p);
    const double a1 = testing::log_uniform(s, 1e-3, 3.0);
    const double a2 = a1 * testing::log_uniform(s, 1.0, 10.0);
    const ThresholdedFit t1 = apply_threshold(fake_fit(theta_hat), a1);
    const ThresholdedFit t2 = apply_threshold(fake_fit(theta_hat), a2);
    CHECK(is_subset(t2.selected, t1.selected));
    // Re-thresholding the thresholded vector changes nothing.
    const ThresholdedFit again = apply_threshold(fake_fit(t1.theta_tilde), a1);
    CHECK(again.theta_tilde == t1.theta_tilde);
    CHECK(again.selected == t1.selected);
    // selected is exactly the support of θ̃.
    CHECK(index_set(t1.theta_tilde, 0.0) == t1.selected);
    for (Eigen::Index j = 0; j < p; ++j)
      CHECK(t1.theta_tilde(j) == (std::fabs(theta_hat(j)) > a1 ? theta_hat(j) : 0.0));
    const SparsityProfile sp = sparsity_profile(theta_hat, testing::uniform_int(s, 16, 100000), a1);
    CHECK(sp.q_minus <= sp.q_n);
    CHECK(sp.q_n <= sp.q_plus);
    CHECK(sp.q_plus <= p);
    CHECK(sp.v_n >= 0.0);
  }
}

TEST_CASE("consistency implication and error split on simulated fits") {
  // Block-orthogonal design with θ supported on the block: a noisy but
  // well-separated selection problem.
  const long n = 60, p = 200;
  const DesignMatrix X = gen_block_orthogonal(n, p, 4, 77);
  const SvdFactorization F = factorize(X);
  Vector beta = Vector::Zero(p);
  beta.head(4) << 1.0, -1.5, 0.8, 2.0;
  const Vector theta = project(beta, F);
  ScheduleParams s;
  s.C1 = 1.0;
  s.C2 = 0.01;
  const double a = threshold_value(n, s);
  const double h = regularization_value(n, p, s);
  const SparsityProfile sp = sparsity_profile(theta, n, a);
  Vector theta1 = theta;
  for (Eigen::Index j = 0; j < p; ++j)
    if (std::fabs(theta(j)) <= a) theta1(j) = 0.0;
  long events = 0;
  for (std::uint64_t r = 0; r < 300; ++r) {
    const Vector y = X.entries() * beta + gen_noise(n, 0.5, 5, r);
    const ThresholdedFit t = apply_threshold(fit_ridge(F, y, h), a);
    const BandCheck bc = selection_band_check(theta, t, sp);
    if (bc.lower_ok && bc.upper_ok && sp.q_plus == sp.q_minus) {
      ++events;
      CHECK(t.selected == index_set(theta, a));
    }
    const Matrix& M = X.entries();
    const double lhs = (M * (t.theta_tilde - theta)).squaredNorm();
    const double rhs = 2.0 * (M * (t.theta_tilde - theta1)).squaredNorm() + 2.0 * (M * (theta1 - theta)).squaredNorm();
    CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
  }
  CHECK(events > 0);
}
