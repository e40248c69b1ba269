#include "htlb/harness.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "htlb/error.hpp"

namespace htlb {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.d = 3;
  c.K = 5;
  c.T = 301;
  c.reps = 2;
  c.jobs = 1;
  return c;
}

template <class F>
void expect_code(Errc code, F&& f) {
  try {
    f();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code);
  }
}

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(std::uint64_t seed) : rng_(seed) {}
  int replications() const override { return 1; }
  int choose(const RoundContexts& contexts) override {
    return std::uniform_int_distribution<int>(0, static_cast<int>(contexts.rows()) - 1)(rng_);
  }
  void observe(const RoundContexts&, int, std::span<const double>) override {}

 private:
  Rng rng_;
};

TEST(Names, RoundTrip) {
  for (Algo a : kAllAlgos) EXPECT_EQ(parse_algo(to_string(a)), a);
  for (NoiseKind n : {NoiseKind::student_t, NoiseKind::pareto, NoiseKind::adversarial,
                      NoiseKind::none}) {
    EXPECT_EQ(parse_noise(to_string(n)), n);
  }
  expect_code(Errc::invalid_parameter, [] { parse_algo("ucb"); });
  expect_code(Errc::invalid_parameter, [] { parse_noise("gauss"); });
}

TEST(Config, DefaultsAndMomentBounds) {
  ExperimentConfig c;
  EXPECT_EQ(c.algos.size(), 6u);
  EXPECT_EQ(c.T, 10000);
  EXPECT_EQ(effective_v_central(c, NoiseKind::student_t), 3.0);
  EXPECT_EQ(effective_v_raw(c, NoiseKind::student_t), 4.0);
  EXPECT_EQ(effective_v_central(c, NoiseKind::pareto), 1.0);
  EXPECT_EQ(effective_v_raw(c, NoiseKind::pareto), 2.0);
  c.v_central = 0.5;
  c.v_raw = 7.0;
  EXPECT_EQ(effective_v_central(c, NoiseKind::pareto), 0.5);
  EXPECT_EQ(effective_v_raw(c, NoiseKind::student_t), 7.0);
}

TEST(Config, Validation) {
  ExperimentConfig c = small_config();
  EXPECT_NO_THROW(validate(c));
  c.eps = 1.5;
  expect_code(Errc::invalid_parameter, [&] { validate(c); });
  c = small_config();
  c.noises = {NoiseKind::adversarial};
  expect_code(Errc::invalid_parameter, [&] { validate(c); });  // d < K + 1
  c.d = 6;
  EXPECT_NO_THROW(validate(c));
  c = small_config();
  c.reps = 0;
  EXPECT_THROW(validate(c), Error);
}

TEST(Config, TextParsing) {
  ExperimentConfig c;
  apply_config_text(
      "# comment\n"
      "algos = supbtc,crt\n"
      "noise=pareto   # trailing\n"
      "\n"
      "T=2500\nK=7\nd=4\neps=0.5\ndelta=0.05\nv-central=2\nv-raw=3\n"
      "reps=4\nseed=99\nfixed-contexts=true\ncentered-pareto=1\nfull-trace=false\n"
      "jobs=2\nout=x.csv\n",
      c);
  EXPECT_EQ(c.algos, (std::vector<Algo>{Algo::supbtc, Algo::crt}));
  EXPECT_EQ(c.noises, std::vector<NoiseKind>{NoiseKind::pareto});
  EXPECT_EQ(c.T, 2500);
  EXPECT_EQ(c.K, 7);
  EXPECT_EQ(c.d, 4);
  EXPECT_EQ(c.eps, 0.5);
  EXPECT_EQ(c.delta, 0.05);
  EXPECT_EQ(*c.v_central, 2.0);
  EXPECT_EQ(*c.v_raw, 3.0);
  EXPECT_EQ(c.reps, 4);
  EXPECT_EQ(c.base_seed, 99u);
  EXPECT_TRUE(c.fixed_contexts);
  EXPECT_TRUE(c.centered_pareto);
  EXPECT_FALSE(c.full_trace);
  EXPECT_EQ(c.jobs, 2);
  EXPECT_EQ(c.out_path, "x.csv");

  expect_code(Errc::invalid_parameter, [&] { apply_config_text("bogus=1\n", c); });
  expect_code(Errc::invalid_parameter, [&] { apply_config_text("T=abc\n", c); });
  expect_code(Errc::invalid_parameter, [&] { apply_config_text("T\n", c); });
  expect_code(Errc::io, [&] { apply_config_file("/nonexistent/dir/cfg.txt", c); });
}

TEST(Seeds, DistinctPerTrajectory) {
  std::set<std::uint64_t> seen;
  for (Algo a : kAllAlgos) {
    for (NoiseKind n : {NoiseKind::student_t, NoiseKind::pareto, NoiseKind::adversarial}) {
      for (int rep = 0; rep < 10; ++rep) seen.insert(trace_seed(20200101, a, n, rep));
    }
  }
  EXPECT_EQ(seen.size(), 6u * 3u * 10u);
  EXPECT_NE(trace_seed(1, Algo::mom, NoiseKind::pareto, 0),
            trace_seed(2, Algo::mom, NoiseKind::pareto, 0));
}

TEST(Simulate, TraceLengthIsHorizon) {
  const ExperimentConfig c = small_config();
  for (Algo a : kAllAlgos) {
    for (NoiseKind n : {NoiseKind::student_t, NoiseKind::pareto}) {
      const RegretTrace t = run_one(c, a, n, 0);
      ASSERT_EQ(t.cum_regret.size(), 301u) << to_string(a);
      EXPECT_EQ(t.algo, a);
      EXPECT_EQ(t.noise, n);
      for (std::size_t i = 1; i < t.cum_regret.size(); ++i) {
        EXPECT_GE(t.cum_regret[i], t.cum_regret[i - 1]);
      }
    }
  }
}

TEST(Simulate, Deterministic) {
  ExperimentConfig c = small_config();
  c.algos = {Algo::supbtc, Algo::menu};
  const auto a = run_all(c);
  const auto b = run_all(c);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].cum_regret, b[i].cum_regret);
    EXPECT_EQ(a[i].algo, b[i].algo);
    EXPECT_EQ(a[i].rep, b[i].rep);
  }
  EXPECT_NE(a[0].cum_regret, a[1].cum_regret);  // reps differ
  c.jobs = 3;
  const auto threaded = run_all(c);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].cum_regret, threaded[i].cum_regret);
}

TEST(Simulate, UniformPolicyOnAdversarialInstance) {
  ExperimentConfig c;
  c.d = 5;
  c.K = 4;
  c.T = 100000;
  UniformPolicy policy(77);
  const RegretTrace t = simulate(c, NoiseKind::adversarial, policy, 123);
  ASSERT_EQ(t.cum_regret.size(), 100000u);
  const double gamma = std::pow(4.0 / (100000.0 + 8.0), 0.5);
  const double expect = gamma * 3.0 / 4.0;
  EXPECT_NEAR(t.cum_regret.back() / 1e5, expect, 0.05 * expect);
}

class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(int d) : theta_(make_theta_star(d)) {}
  int replications() const override { return 3; }
  int choose(const RoundContexts& contexts) override {
    Eigen::Index best = 0;
    (contexts * theta_).maxCoeff(&best);
    return static_cast<int>(best);
  }
  void observe(const RoundContexts&, int, std::span<const double>) override {}

 private:
  Vector theta_;
};

TEST(Simulate, OptimalArmsCostNothing) {
  ExperimentConfig c = small_config();
  OraclePolicy policy(c.d);
  const RegretTrace t = simulate(c, NoiseKind::none, policy, 5);
  ASSERT_EQ(t.cum_regret.size(), 301u);
  EXPECT_EQ(t.cum_regret.back(), 0.0);
}

TEST(Simulate, NoiselessRegretIsSublinear) {
  ExperimentConfig c;
  c.d = 2;
  c.K = 3;
  c.T = 20000;
  c.delta = 0.5;
  c.v_raw = 1e-6;
  const RegretTrace t = run_one(c, Algo::crt, NoiseKind::none, 0);
  EXPECT_LT(t.cum_regret[19999], 2.0 * t.cum_regret[4999]);
}

TEST(Aggregate, Examples) {
  RegretTrace one{Algo::mom, NoiseKind::pareto, 0, {1.0, 2.0}};
  AggregateSeries s = aggregate(std::span(&one, 1));
  EXPECT_EQ(s.mean, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(s.stderr_, (std::vector<double>{0.0, 0.0}));

  std::vector<RegretTrace> two{{Algo::mom, NoiseKind::pareto, 0, {2.0}},
                               {Algo::mom, NoiseKind::pareto, 1, {4.0}}};
  s = aggregate(two);
  EXPECT_DOUBLE_EQ(s.mean[0], 3.0);
  EXPECT_DOUBLE_EQ(s.stderr_[0], 1.0);

  two[1].cum_regret.push_back(5.0);
  expect_code(Errc::aggregation, [&] { aggregate(two); });
  expect_code(Errc::aggregation, [] { aggregate(std::span<const RegretTrace>{}); });
}

TEST(Csv, SampledPulls) {
  EXPECT_EQ(sampled_pulls(5).size(), 5u);
  EXPECT_EQ(sampled_pulls(1000).size(), 1000u);
  const auto p = sampled_pulls(2500);
  EXPECT_EQ(p.front(), 3);
  EXPECT_EQ(p[1], 6);
  EXPECT_EQ(p.back(), 2500);
  EXPECT_EQ(p.size(), 834u);
  EXPECT_EQ(sampled_pulls(10000).size(), 1000u);
  EXPECT_EQ(sampled_pulls(10000, true).size(), 10000u);
  EXPECT_TRUE(sampled_pulls(0).empty());
}

TEST(Csv, HeaderOnly) {
  EXPECT_EQ(format_csv({}), "algo,noise,rep,pull,cum_regret\n");
  EXPECT_TRUE(parse_csv(format_csv({})).empty());
  expect_code(Errc::io, [] { parse_csv(""); });
  expect_code(Errc::io, [] { parse_csv("a,b\n"); });
}

TEST(Csv, RoundTrip) {
  std::vector<RegretTrace> traces{{Algo::supbtc, NoiseKind::student_t, 3, {}},
                                  {Algo::tofu, NoiseKind::pareto, 0, {0.1, 1.0 / 3.0, 7.25}}};
  for (int i = 0; i < 1500; ++i) traces[0].cum_regret.push_back(std::sqrt(i + 1.0) / 7.0);
  const auto path = std::filesystem::temp_directory_path() / "htlb_roundtrip.csv";
  write_csv(traces, path);
  const auto rows = read_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(rows.size(), 750u + 3u);
  EXPECT_EQ(rows[0].algo, "supbtc");
  EXPECT_EQ(rows[0].noise, "student_t");
  EXPECT_EQ(rows[0].rep, 3);
  EXPECT_EQ(rows[0].pull, 2);
  EXPECT_EQ(rows[0].cum_regret, traces[0].cum_regret[1]);
  EXPECT_EQ(rows[749].pull, 1500);
  EXPECT_EQ(rows[751].cum_regret, 1.0 / 3.0);
  EXPECT_EQ(rows[752].algo, "tofu");
  EXPECT_EQ(rows[752].pull, 3);
}

TEST(Csv, UnwritablePath) {
  const RegretTrace t{Algo::mom, NoiseKind::pareto, 0, {1.0}};
  expect_code(Errc::io, [&] { write_csv(std::span(&t, 1), "/nonexistent/dir/out.csv"); });
}

TEST(RunOne, ErrorsNameTheTrajectory) {
  ExperimentConfig c = small_config();
  c.noises = {NoiseKind::adversarial};
  try {
    run_one(c, Algo::crt, NoiseKind::adversarial, 4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_parameter);
    EXPECT_NE(std::string(e.what()).find("crt/adversarial/rep 4"), std::string::npos);
  }
}

}  // namespace
}  // namespace htlb
