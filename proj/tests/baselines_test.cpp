#include "htlb/baselines.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "htlb/error.hpp"

namespace htlb {
namespace {

BaselineParams params(BaselineKind kind, int d = 3, int K = 5, long T = 500) {
  BaselineParams p;
  p.kind = kind;
  p.d = d;
  p.K = K;
  p.T = T;
  return p;
}

TEST(Mom, StoresElementMedian) {
  EXPECT_EQ(mom_store_value(std::vector<double>{0.0, 5.0, 100.0}), 5.0);
  EXPECT_EQ(mom_store_value(std::vector<double>{4.0, -1.0, 2.0, 3.0}), 2.0);
  BaselineState s = baseline_init(params(BaselineKind::mom, 1, 1));
  RoundContexts c(1, 1);
  c << 1.0;
  std::vector<double> rec(static_cast<std::size_t>(s.r), 0.0);
  for (std::size_t i = 0; i < rec.size() / 2; ++i) rec[i] = 1e9;
  baseline_record(s, c, 0, rec);
  EXPECT_EQ(s.payoffs.back(), 0.0);
  EXPECT_EQ(s.pull_budget_used, s.r);
}

TEST(Crt, Threshold) {
  EXPECT_DOUBLE_EQ(crt_threshold(16, 1.0), 2.0);
  EXPECT_EQ(crt_truncate(3.0, 16, 1.0), 0.0);
  EXPECT_EQ(crt_truncate(-3.0, 16, 1.0), 0.0);
  EXPECT_EQ(crt_truncate(1.5, 16, 1.0), 1.5);
  EXPECT_EQ(crt_truncate(2.0, 16, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(crt_threshold(1, 0.5), 1.0);
}

TEST(Crt, RecordUsesRoundIndex) {
  BaselineState s = baseline_init(params(BaselineKind::crt, 1, 1));
  RoundContexts c(1, 1);
  c << 1.0;
  baseline_record(s, c, 0, std::vector<double>{1.5});  // t = 1, eta = 1
  EXPECT_EQ(s.payoffs.back(), 0.0);
  for (int i = 0; i < 15; ++i) baseline_record(s, c, 0, std::vector<double>{0.0});
  baseline_record(s, c, 0, std::vector<double>{1.5});  // t = 17, eta > 2
  EXPECT_EQ(s.payoffs.back(), 1.5);
}

TEST(Menu, Examples) {
  const Matrix a = Matrix::Identity(1, 1);
  Matrix one(1, 1);
  one << 3.0;
  EXPECT_EQ(menu_select(one, a), 0);
  Matrix same = Matrix::Constant(2, 5, 0.7);
  EXPECT_EQ(menu_select(same, Matrix::Identity(2, 2)), 0);
  Matrix three(1, 3);
  three << 0.0, 1.0, 1.5;
  EXPECT_EQ(menu_select(three, a), 1);
  EXPECT_THROW(menu_select(Matrix(2, 0), Matrix::Identity(2, 2)), Error);
}

TEST(Menu, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 4;
    const int r = 1 + 2 * (trial % 6);
    Matrix thetas(d, r);
    for (Eigen::Index i = 0; i < thetas.size(); ++i) thetas(i) = normal(rng);
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
    const Matrix a = Matrix::Identity(d, d) + m * m.transpose();

    int best = 0;
    double best_med = 0.0;
    for (int j = 0; j < r; ++j) {
      std::vector<double> dist;
      for (int s = 0; s < r; ++s) {
        const Vector diff = thetas.col(j) - thetas.col(s);
        dist.push_back(std::sqrt(diff.dot(a * diff)));
      }
      std::sort(dist.begin(), dist.end());
      const double med = dist[(dist.size() - 1) / 2];
      if (j == 0 || med < best_med - 1e-12) {
        best = j;
        best_med = med;
      }
    }
    EXPECT_EQ(menu_select(thetas, a), best) << "trial " << trial;
  }
}

TEST(Tofu, ThresholdAndDefaultScale) {
  EXPECT_NEAR(tofu_default_cb(3.0, 10, 10000, 0.01, 1.0), 0.42243580057231384, 1e-15);
  EXPECT_EQ(tofu_threshold(1, 1.0, 0.4), tofu_threshold(9999, 1.0, 0.4));
  EXPECT_LT(tofu_threshold(10, 0.5, 0.4), tofu_threshold(1000, 0.5, 0.4));
}

TEST(Tofu, SingleCoordinate) {
  Matrix a(1, 1);
  a << 2.0;
  RowMatrix v(1, 1);
  v << 1.0;
  Vector y(1);
  y << 0.8;
  EXPECT_NEAR(tofu_estimate(a, v, y, 10.0)(0), 0.4, 1e-15);
  // u = 1/sqrt(2), u y ~ 0.566 exceeds 0.5
  EXPECT_EQ(tofu_estimate(a, v, y, 0.5)(0), 0.0);
}

TEST(Tofu, LargeThresholdRecoversRidge) {
  std::mt19937_64 rng(2);
  const int d = 4, n = 40;
  RowMatrix v(n, d);
  Vector y(n);
  std::normal_distribution<double> normal;
  for (int i = 0; i < n; ++i) {
    v.row(i) = gen_contexts(rng, d, 1).row(0);
    y(i) = normal(rng);
  }
  const Matrix a = Matrix::Identity(d, d) + v.transpose() * v;
  const Vector ridge = a.ldlt().solve(v.transpose() * y);
  EXPECT_LT((tofu_estimate(a, v, y, 1e12) - ridge).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tofu, InverseSqrt) {
  Matrix a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  const Matrix root = inverse_sqrt_spd(a);
  EXPECT_LT((root * a * root - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((root - root.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  try {
    inverse_sqrt_spd(singular);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::numeric_degeneracy);
  }
}

TEST(Baseline, InitAndAlpha) {
  const BaselineState mom = baseline_init(params(BaselineKind::mom, 10, 20, 10000));
  EXPECT_EQ(mom.r, 159);
  EXPECT_EQ(mom.stored_width(), 1);
  EXPECT_EQ(baseline_init(params(BaselineKind::menu, 10, 20, 10000)).stored_width(), 159);
  EXPECT_EQ(baseline_init(params(BaselineKind::crt)).r, 1);
  EXPECT_EQ(baseline_init(params(BaselineKind::tofu)).r, 1);
  EXPECT_DOUBLE_EQ(baseline_alpha(mom, 3), 6.0);
  BaselineParams p = params(BaselineKind::crt, 10, 20, 10000);
  p.v = 4.0;
  EXPECT_NEAR(baseline_alpha(baseline_init(p), 3), 29.711568037979376, 1e-10);
  EXPECT_THROW(baseline_init(params(BaselineKind::mom, 3, 5, 2)), Error);
}

TEST(Baseline, EmptyHistoryEstimates) {
  for (BaselineKind kind : {BaselineKind::mom, BaselineKind::crt, BaselineKind::menu,
                            BaselineKind::tofu}) {
    const BaselineState s = baseline_init(params(kind, 2, 2));
    RoundContexts c(2, 2);
    c << 1.0, 0.0, 0.0, 0.5;
    const auto est = baseline_estimate(s, c);
    const double alpha = baseline_alpha(s, 1);
    EXPECT_EQ(est[0].r_hat, 0.0);
    EXPECT_DOUBLE_EQ(est[0].width, alpha + 1.0);
    EXPECT_DOUBLE_EQ(est[1].width, 0.5 * (alpha + 1.0));
    EXPECT_EQ(baseline_select(s, c), 0);
  }
}

TEST(Baseline, RecordValidation) {
  BaselineState s = baseline_init(params(BaselineKind::mom, 2, 2));
  RoundContexts c = RoundContexts::Zero(2, 2);
  try {
    baseline_record(s, c, 0, std::vector<double>{1.0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_record);
  }
  EXPECT_THROW(baseline_record(s, c, 2, std::vector<double>(s.r, 0.0)), Error);
  EXPECT_EQ(s.rounds, 0);
}

// With every replication equal, MENU's estimates coincide and so do the arms played.
TEST(Baseline, MomAndMenuAgreeOnConstantReplications) {
  std::mt19937_64 rng(5);
  BaselineState mom = baseline_init(params(BaselineKind::mom, 3, 6, 400));
  BaselineState menu = baseline_init(params(BaselineKind::menu, 3, 6, 400));
  ASSERT_EQ(mom.r, menu.r);
  const Vector theta = make_theta_star(3);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (int t = 0; t < 200; ++t) {
    const RoundContexts c = gen_contexts(rng, 3, 6);
    const int a = baseline_select(mom, c);
    ASSERT_EQ(a, baseline_select(menu, c)) << "round " << t;
    const std::vector<double> rec(static_cast<std::size_t>(mom.r),
                                  c.row(a).dot(theta) + normal(rng));
    baseline_record(mom, c, a, rec);
    baseline_record(menu, c, a, rec);
  }
}

TEST(Baseline, StateMatchesStoredData) {
  std::mt19937_64 rng(9);
  for (BaselineKind kind : {BaselineKind::crt, BaselineKind::tofu, BaselineKind::menu}) {
    BaselineState s = baseline_init(params(kind, 3, 4, 100));
    std::normal_distribution<double> normal;
    for (int t = 0; t < 30; ++t) {
      const RoundContexts c = gen_contexts(rng, 3, 4);
      std::vector<double> rec(static_cast<std::size_t>(s.r));
      for (double& y : rec) y = normal(rng);
      baseline_record(s, c, baseline_select(s, c), rec);
    }
    const Matrix b = s.context_matrix().transpose() * s.payoff_matrix();
    EXPECT_LT((b - s.b).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix a = Matrix::Identity(3, 3) + s.context_matrix().transpose() * s.context_matrix();
    EXPECT_LT((a - s.gram.a).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(s.pull_budget_used, 30L * s.r);
  }
}

// Noiseless payoffs, a tiny moment bound and d = 2: the mean per-round regret
// over the last 10% of rounds falls below 10% of the overall mean.
TEST(Baseline, NoiselessRegretFlattens) {
  const int d = 2, K = 3;
  const Vector theta = make_theta_star(d);
  for (BaselineKind kind : {BaselineKind::mom, BaselineKind::crt, BaselineKind::menu,
                            BaselineKind::tofu}) {
    // alpha stays above 2/3 ln(...) for the truncation baselines, so they need longer
    const long rounds = kind == BaselineKind::mom || kind == BaselineKind::menu ? 6000 : 40000;
    BaselineParams p = params(kind, d, K, rounds);
    p.v = 1e-6;
    p.delta = 0.5;
    p.tofu_cb = 1e6;
    BaselineState s = baseline_init(p);
    Rng rng(31);
    double total = 0.0, tail = 0.0;
    for (long t = 0; t < rounds; ++t) {
      const RoundContexts c = gen_contexts(rng, d, K);
      const int a = baseline_select(s, c);
      const double regret = instant_regret(c, theta, a);
      total += regret;
      if (t >= rounds - rounds / 10) tail += regret;
      baseline_record(s, c, a,
                      std::vector<double>(static_cast<std::size_t>(s.r), c.row(a).dot(theta)));
    }
    EXPECT_LT(tail / (rounds / 10), 0.1 * total / rounds) << static_cast<int>(kind);
  }
}

}  // namespace
}  // namespace htlb
