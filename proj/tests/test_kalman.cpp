#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "survtrack/kalman.hpp"

namespace st = survtrack;
using st::Box;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

namespace {

const st::NoiseConfig<double> kNoise;

st::MotionState<double> state(std::initializer_list<double> mean) {
  st::MotionState<double> s;
  std::size_t i = 0;
  for (double v : mean) s.mean(static_cast<Eigen::Index>(i++)) = v;
  s.covariance = Mat8::Identity();
  return s;
}

// noise magnitudes re-derived from the model definition
Eigen::Vector4d magnitudes(const Vec8& m) {
  const double s = std::max(m(2), 1e-6);
  const double r = std::clamp(m(3), 1e-3, 1e3);
  const double h = std::max(std::sqrt(s / r), 1.0);
  return {h, h, std::max(s, 1.0), r};
}

Eigen::MatrixXd oracle_q(const Vec8& m) {
  const Eigen::Vector4d g = magnitudes(m);
  Eigen::VectorXd sd(8);
  for (int i = 0; i < 8; ++i) sd(i) = kNoise.process_weight(i) * g(i % 4);
  return sd.array().square().matrix().asDiagonal();
}

Eigen::MatrixXd oracle_r(const Vec8& m) {
  const Eigen::Vector4d g = magnitudes(m);
  Eigen::VectorXd sd(4);
  for (int i = 0; i < 4; ++i) sd(i) = kNoise.measurement_weight(i) * g(i);
  return sd.array().square().matrix().asDiagonal();
}

}  // namespace

TEST(InitState, Examples) {
  const auto a = st::init_state(Box{0, 0, 10, 10}, kNoise);
  EXPECT_EQ(a.mean, (Vec8() << 5, 5, 100, 1, 0, 0, 0, 0).finished());
  const auto b = st::init_state(Box{10, 20, 4, 8}, kNoise);
  EXPECT_EQ(b.mean, (Vec8() << 12, 24, 32, 0.5, 0, 0, 0, 0).finished());
  EXPECT_THROW(st::init_state(Box{5, 5, 0, 10}, kNoise), std::invalid_argument);
}

TEST(InitState, VelocityVarianceIsDiagonalAndPositive) {
  const auto a = st::init_state(Box{0, 0, 30, 72}, kNoise);
  EXPECT_TRUE(a.covariance.isDiagonal());
  EXPECT_TRUE((a.covariance.diagonal().array() > 0).all());
}

TEST(Predict, Examples) {
  const auto a = st::predict(state({5, 5, 100, 1, 0, 0, 0, 0}), kNoise);
  EXPECT_EQ(a.mean.head<4>(), Eigen::Vector4d(5, 5, 100, 1));
  const auto b = st::predict(state({5, 5, 100, 1, 2, -1, 0, 0}), kNoise);
  EXPECT_EQ(b.mean.head<4>(), Eigen::Vector4d(7, 4, 100, 1));
}

TEST(Predict, AreaFlooredAtZero) {
  const auto a = st::predict(state({5, 5, 3, 1, 0, 0, -10, 0}), kNoise);
  EXPECT_EQ(a.mean(2), 0.0);
  const Box box = st::state_to_box(a);
  EXPECT_TRUE(std::isfinite(box.w) && std::isfinite(box.h));
}

TEST(PredictProperty, TraceIncreasesForNonNegativeCrossCovariance) {
  // with a negative position/velocity covariance F P F^T can shrink the
  // trace, so inputs are diagonal plus non-negative couplings
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    st::MotionState<double> s = state({u(rng) * 500, u(rng) * 500, 100 + u(rng) * 5000, 0.2 + u(rng), u(rng), u(rng),
                                       u(rng), 0});
    Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
    for (int i = 0; i < 8; ++i) a(i, i) = 0.1 + u(rng) * 10;
    for (int i = 0; i < 4; ++i) a(i, i + 4) = u(rng);
    s.covariance = a * a.transpose();
    const double before = s.covariance.trace();
    EXPECT_GT(st::predict(s, kNoise).covariance.trace(), before);
  }
}

TEST(PredictProperty, NegativeCouplingCanShrinkTrace) {
  // unit-sized box keeps the process noise far below the coupling effect
  st::MotionState<double> s = state({5, 5, 1, 1, 0, 0, 0, 0});
  s.covariance = Mat8::Identity();
  for (int i = 0; i < 4; ++i) s.covariance(i, i + 4) = s.covariance(i + 4, i) = -0.9;
  EXPECT_LT(st::predict(s, kNoise).covariance.trace(), s.covariance.trace());
}

TEST(Update, ZeroInnovationKeepsMeanShrinksCovariance) {
  const auto prior = st::predict(st::init_state(Box{100, 50, 30, 72}, kNoise), kNoise);
  const auto post = st::update(prior, st::state_to_box(prior), kNoise);
  EXPECT_LT((post.mean - prior.mean).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE((post.covariance.diagonal().array() < prior.covariance.diagonal().array() + 1e-15).all());
  EXPECT_LT(post.covariance.trace(), prior.covariance.trace());
}

TEST(Update, ScalarGainOneHalf) {
  st::MotionState<double> prior;
  prior.mean.setZero();
  prior.covariance.setIdentity();
  const auto post = st::correct<double>(prior, Eigen::Vector4d(10, 10, 10, 10), Eigen::Matrix4d::Identity());
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(post.mean(i), 5.0, 1e-12);
    EXPECT_NEAR(post.covariance(i, i), 0.5, 1e-12);
  }
  EXPECT_NEAR(post.mean.tail<4>().norm(), 0.0, 1e-12);
}

TEST(Update, RepeatedObservationConverges) {
  const Box target{200, 100, 40, 96};
  auto s = st::init_state(Box{150, 90, 38, 90}, kNoise);
  for (int i = 0; i < 200; ++i) s = st::update(st::predict(s, kNoise), target, kNoise);
  EXPECT_LT((s.mean.head<2>() - st::box_to_observation(target).head<2>()).norm(), 1e-3);
}

TEST(Update, PosteriorBetweenPriorAndObservation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int k = 0; k < 200; ++k) {
    const auto prior = st::predict(st::init_state(Box{300, 200, 30, 70}, kNoise), kNoise);
    const Box obs{300 + u(rng), 200 + u(rng), 30 + u(rng) / 4, 70 + u(rng) / 2};
    const auto post = st::update(prior, obs, kNoise);
    const Eigen::Vector4d z = st::box_to_observation(obs);
    for (int i = 0; i < 4; ++i) {
      EXPECT_GE(post.mean(i), std::min(prior.mean(i), z(i)) - 1e-9);
      EXPECT_LE(post.mean(i), std::max(prior.mean(i), z(i)) + 1e-9);
    }
    EXPECT_TRUE((post.covariance.diagonal().array() <= prior.covariance.diagonal().array()).all());
    EXPECT_LT((post.covariance - post.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Update, BrokenCovarianceThrows) {
  st::MotionState<double> s = state({5, 5, 100, 1, 0, 0, 0, 0});
  s.covariance = -Mat8::Identity();
  EXPECT_THROW(st::correct<double>(s, Eigen::Vector4d(5, 5, 100, 1), Eigen::Matrix4d::Identity() * 1e-3), st::KalmanError);
}

TEST(StateToBox, Examples) {
  const Box a = st::state_to_box(state({5, 5, 100, 1, 0, 0, 0, 0}));
  EXPECT_NEAR(a.x, 0, 1e-12);
  EXPECT_NEAR(a.y, 0, 1e-12);
  EXPECT_NEAR(a.w, 10, 1e-12);
  EXPECT_NEAR(a.h, 10, 1e-12);
  const Box b = st::state_to_box(state({12, 24, 32, 0.5, 0, 0, 0, 0}));
  EXPECT_NEAR(b.x, 10, 1e-12);
  EXPECT_NEAR(b.y, 20, 1e-12);
  EXPECT_NEAR(b.w, 4, 1e-12);
  EXPECT_NEAR(b.h, 8, 1e-12);
  const Box c = st::state_to_box(state({0, 0, -5, 0, 0, 0, 0, 0}));
  EXPECT_TRUE(std::isfinite(c.w) && std::isfinite(c.h) && c.w > 0 && c.h > 0);
}

TEST(StateToBoxProperty, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-100, 2000), size(0.5, 400);
  for (int k = 0; k < 2000; ++k) {
    const Box b{pos(rng), pos(rng), size(rng), size(rng)};
    const Box r = st::state_to_box(st::init_state(b, kNoise));
    EXPECT_NEAR(r.x, b.x, 1e-9);
    EXPECT_NEAR(r.y, b.y, 1e-9);
    EXPECT_NEAR(r.w, b.w, 1e-9);
    EXPECT_NEAR(r.h, b.h, 1e-9);
  }
}

TEST(KalmanProperty, ConstantVelocityTrackingConverges) {
  const Box start{100, 200, 30, 72};
  auto s = st::init_state(start, kNoise);
  for (int f = 1; f <= 30; ++f) {
    s = st::predict(s, kNoise);
    s = st::update(s, start.translated(3.0 * f, -1.5 * f), kNoise);
  }
  const Box truth = start.translated(90, -45);
  const Box est = st::state_to_box(s);
  EXPECT_LT(std::hypot(est.x - truth.x, est.y - truth.y), 0.5);
}

TEST(KalmanOracle, MatchesTextbookFilter) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  const Eigen::MatrixXd f = st::transition_matrix<double>();
  const Eigen::MatrixXd h = st::observation_matrix<double>();
  double worst = 0.0;
  for (int seq = 0; seq < 100; ++seq) {
    Box box{500 + 200 * u(rng), 300 + 100 * u(rng), 40 + 10 * u(rng), 100 + 20 * u(rng)};
    auto s = st::init_state(box, kNoise);
    oracle::TextbookKalman ref{s.mean, s.covariance};
    for (int step = 0; step < 20; ++step) {
      ref.predict(f, oracle_q(ref.x));
      s = st::predict(s, kNoise);
      box = box.translated(2 + u(rng), u(rng));
      box.w += 0.2 * u(rng);
      box.h += 0.4 * u(rng);
      ref.update(h, oracle_r(ref.x), st::box_to_observation(box));
      s = st::update(s, box, kNoise);
      const Eigen::VectorXd rel =
          (s.mean - ref.x).cwiseAbs().cwiseQuotient(ref.x.cwiseAbs().cwiseMax(1.0));
      worst = std::max(worst, rel.maxCoeff());
    }
  }
  EXPECT_LT(worst, 1e-8);
}
