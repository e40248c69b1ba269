#include "htlb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "htlb/error.hpp"

namespace htlb {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(Errc::invalid_parameter,
                "invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(Errc::invalid_parameter,
              "invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class MasterPolicy final : public Policy {
 public:
  explicit MasterPolicy(const MasterParams& params) : state_(master_init(params)) {}

  int replications() const override { return state_.r; }

  int choose(const RoundContexts& contexts) override {
    last_ = select_arm(state_, contexts);
    return last_.arm;
  }

  void observe(const RoundContexts& contexts, int arm, std::span<const double> payoffs) override {
    if (arm != last_.arm) throw Error(Errc::invalid_record, "observe: arm differs from decision");
    record(state_, last_, contexts, payoffs);
  }

 private:
  MasterState state_;
  Decision last_;
};

class BaselinePolicy final : public Policy {
 public:
  explicit BaselinePolicy(const BaselineParams& params) : state_(baseline_init(params)) {}

  int replications() const override { return state_.r; }

  int choose(const RoundContexts& contexts) override { return baseline_select(state_, contexts); }

  void observe(const RoundContexts& contexts, int arm, std::span<const double> payoffs) override {
    baseline_record(state_, contexts, arm, payoffs);
  }

 private:
  BaselineState state_;
};

bool uses_central_moment(Algo algo) {
  return algo == Algo::supbmm || algo == Algo::mom || algo == Algo::menu;
}

}  // namespace

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::supbmm: return "supbmm";
    case Algo::supbtc: return "supbtc";
    case Algo::mom: return "mom";
    case Algo::crt: return "crt";
    case Algo::menu: return "menu";
    case Algo::tofu: return "tofu";
  }
  return "?";
}

std::string_view to_string(NoiseKind noise) {
  switch (noise) {
    case NoiseKind::student_t: return "student_t";
    case NoiseKind::pareto: return "pareto";
    case NoiseKind::adversarial: return "adversarial";
    case NoiseKind::none: return "none";
  }
  return "?";
}

Algo parse_algo(std::string_view name) {
  for (Algo a : kAllAlgos) {
    if (to_string(a) == name) return a;
  }
  throw Error(Errc::invalid_parameter, "unknown algorithm '" + std::string(name) + "'");
}

NoiseKind parse_noise(std::string_view name) {
  for (NoiseKind n : {NoiseKind::student_t, NoiseKind::pareto, NoiseKind::adversarial,
                      NoiseKind::none}) {
    if (to_string(n) == name) return n;
  }
  throw Error(Errc::invalid_parameter, "unknown noise '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_parameter, msg); };
  if (c.algos.empty()) fail("at least one algorithm is required");
  if (c.noises.empty()) fail("at least one noise model is required");
  if (c.d < 1) fail("d must be positive");
  if (c.K < 1) fail("K must be positive");
  if (c.T < 3) fail("T must be at least 3");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) fail("eps must lie in (0, 1]");
  if (!(c.delta > 0.0 && c.delta < 1.0)) fail("delta must lie in (0, 1)");
  if (c.v_central && !(*c.v_central > 0.0)) fail("v-central must be positive");
  if (c.v_raw && !(*c.v_raw > 0.0)) fail("v-raw must be positive");
  if (c.reps < 1) fail("reps must be positive");
  if (c.jobs < 0) fail("jobs must be non-negative");
  for (NoiseKind n : c.noises) {
    if (n != NoiseKind::adversarial) continue;
    if (c.K < 4 || c.T < c.K) fail("adversarial noise needs T >= K >= 4");
    if (c.d < c.K + 1) fail("adversarial noise needs d >= K + 1");
  }
}

double effective_v_central(const ExperimentConfig& c, NoiseKind noise) {
  if (c.v_central) return *c.v_central;
  switch (noise) {
    case NoiseKind::student_t: return 3.0;
    case NoiseKind::pareto: return 1.0;
    case NoiseKind::adversarial: return 2.0;
    case NoiseKind::none: return 1.0;
  }
  return 1.0;
}

double effective_v_raw(const ExperimentConfig& c, NoiseKind noise) {
  if (c.v_raw) return *c.v_raw;
  switch (noise) {
    case NoiseKind::student_t: return 4.0;
    case NoiseKind::pareto: return 2.0;
    case NoiseKind::adversarial: return 2.0;
    case NoiseKind::none: return 1.0;
  }
  return 1.0;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& c, Algo algo, NoiseKind noise) {
  const double v = uses_central_moment(algo) ? effective_v_central(c, noise)
                                             : effective_v_raw(c, noise);
  if (algo == Algo::supbmm || algo == Algo::supbtc) {
    MasterParams p;
    p.variant = algo == Algo::supbmm ? Variant::bmm : Variant::btc;
    p.T = c.T;
    p.K = c.K;
    p.d = c.d;
    p.eps = c.eps;
    p.delta = c.delta;
    p.v = v;
    return std::make_unique<MasterPolicy>(p);
  }
  BaselineParams p;
  switch (algo) {
    case Algo::mom: p.kind = BaselineKind::mom; break;
    case Algo::crt: p.kind = BaselineKind::crt; break;
    case Algo::menu: p.kind = BaselineKind::menu; break;
    default: p.kind = BaselineKind::tofu; break;
  }
  p.T = c.T;
  p.K = c.K;
  p.d = c.d;
  p.eps = c.eps;
  p.delta = c.delta;
  p.v = v;
  return std::make_unique<BaselinePolicy>(p);
}

std::uint64_t trace_seed(std::uint64_t base_seed, Algo algo, NoiseKind noise, int rep) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ (0x100ULL + static_cast<std::uint64_t>(algo)));
  h = splitmix64(h ^ (0x200ULL + static_cast<std::uint64_t>(noise)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(rep)));
  return h;
}

RegretTrace simulate(const ExperimentConfig& c, NoiseKind noise, Policy& policy,
                     std::uint64_t seed) {
  Rng rng(seed);
  const bool adversarial = noise == NoiseKind::adversarial;

  std::optional<AdversarialInstance> inst;
  std::optional<LinearEnv> env;
  if (adversarial) {
    inst = build_adversarial(c.d, c.K, c.T, c.eps, rng);
  } else {
    NoiseModel model = NoiseModel::zero();
    if (noise == NoiseKind::student_t) model = NoiseModel::student_t(3.0);
    if (noise == NoiseKind::pareto) model = NoiseModel::pareto(3.0, 0.01, c.centered_pareto);
    env.emplace(make_theta_star(c.d), c.K, model);
  }

  std::optional<RoundContexts> fixed;
  if (!adversarial && c.fixed_contexts) fixed = gen_contexts(rng, c.d, c.K);

  RegretTrace trace;
  trace.noise = noise;
  trace.cum_regret.reserve(static_cast<std::size_t>(c.T));
  const int r = policy.replications();
  std::vector<double> payoffs(static_cast<std::size_t>(r));
  long pulls = 0;
  double cum = 0.0;
  while (pulls < c.T) {
    const long t = pulls + 1;  // physical time of the round's first pull
    RoundContexts contexts = adversarial ? adversarial_contexts(*inst, t)
                             : fixed     ? *fixed
                                         : gen_contexts(rng, c.d, c.K);
    const int arm = policy.choose(contexts);
    const double regret = adversarial ? instant_regret(*inst, contexts, arm)
                                      : instant_regret(*env, contexts, arm);
    for (double& y : payoffs) {
      y = adversarial ? adversarial_pull(*inst, t, arm, rng) : pull(*env, contexts, arm, rng);
      if (pulls < c.T) {
        cum += regret;
        trace.cum_regret.push_back(cum);
        ++pulls;
      }
    }
    policy.observe(contexts, arm, payoffs);
  }
  return trace;
}

RegretTrace run_one(const ExperimentConfig& c, Algo algo, NoiseKind noise, int rep) {
  try {
    validate(c);
    auto policy = make_policy(c, algo, noise);
    RegretTrace trace = simulate(c, noise, *policy, trace_seed(c.base_seed, algo, noise, rep));
    trace.algo = algo;
    trace.rep = rep;
    return trace;
  } catch (const Error& e) {
    throw Error(e.code(), std::string("run ") + std::string(to_string(algo)) + "/" +
                              std::string(to_string(noise)) + "/rep " + std::to_string(rep) +
                              ": " + e.what());
  }
}

std::vector<RegretTrace> run_all(const ExperimentConfig& c) {
  validate(c);
  struct Task {
    Algo algo;
    NoiseKind noise;
    int rep;
  };
  std::vector<Task> tasks;
  for (Algo a : c.algos) {
    for (NoiseKind n : c.noises) {
      for (int rep = 0; rep < c.reps; ++rep) tasks.push_back({a, n, rep});
    }
  }

  std::vector<RegretTrace> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_one(c, tasks[i].algo, tasks[i].noise, tasks[i].rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned n_workers = c.jobs > 0 ? static_cast<unsigned>(c.jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(tasks.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

AggregateSeries aggregate(std::span<const RegretTrace> traces) {
  if (traces.empty()) throw Error(Errc::aggregation, "aggregate: no traces");
  const std::size_t len = traces.front().cum_regret.size();
  for (const RegretTrace& t : traces) {
    if (t.cum_regret.size() != len) {
      throw Error(Errc::aggregation, "aggregate: traces have different lengths");
    }
  }
  const double n = static_cast<double>(traces.size());
  AggregateSeries out;
  out.mean.assign(len, 0.0);
  out.stderr_.assign(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const RegretTrace& t : traces) sum += t.cum_regret[i];
    const double mean = sum / n;
    out.mean[i] = mean;
    if (traces.size() > 1) {
      double ss = 0.0;
      for (const RegretTrace& t : traces) ss += (t.cum_regret[i] - mean) * (t.cum_regret[i] - mean);
      out.stderr_[i] = std::sqrt(ss / (n - 1.0) / n);
    }
  }
  return out;
}

std::vector<long> sampled_pulls(long T, bool full_trace) {
  std::vector<long> pulls;
  if (T < 1) return pulls;
  const long step = full_trace ? 1 : (T + 999) / 1000;
  for (long p = step; p <= T; p += step) pulls.push_back(p);
  if (pulls.empty() || pulls.back() != T) pulls.push_back(T);
  return pulls;
}

std::string format_csv(std::span<const RegretTrace> traces, bool full_trace) {
  std::string out = "algo,noise,rep,pull,cum_regret\n";
  char buf[64];
  for (const RegretTrace& t : traces) {
    const auto T = static_cast<long>(t.cum_regret.size());
    for (long p : sampled_pulls(T, full_trace)) {
      std::snprintf(buf, sizeof buf, "%.17g", t.cum_regret[static_cast<std::size_t>(p - 1)]);
      out += to_string(t.algo);
      out += ',';
      out += to_string(t.noise);
      out += ',';
      out += std::to_string(t.rep);
      out += ',';
      out += std::to_string(p);
      out += ',';
      out += buf;
      out += '\n';
    }
  }
  return out;
}

void write_csv(std::span<const RegretTrace> traces, const std::filesystem::path& path,
               bool full_trace) {
  const std::string text = format_csv(traces, full_trace);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error(Errc::io, "failed writing '" + path.string() + "'");
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  bool header = true;
  for (std::string_view line : split(text, '\n')) {
    if (line.empty()) continue;
    if (header) {
      if (line != "algo,noise,rep,pull,cum_regret") {
        throw Error(Errc::io, "csv: unexpected header '" + std::string(line) + "'");
      }
      header = false;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5) throw Error(Errc::io, "csv: expected 5 fields");
    CsvRow row;
    row.algo = std::string(fields[0]);
    row.noise = std::string(fields[1]);
    row.rep = parse_number<int>("rep", fields[2]);
    row.pull = parse_number<long>("pull", fields[3]);
    row.cum_regret = parse_number<double>("cum_regret", fields[4]);
    rows.push_back(std::move(row));
  }
  if (header) throw Error(Errc::io, "csv: missing header");
  return rows;
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void apply_setting(std::string_view key, std::string_view value, ExperimentConfig& c) {
  if (key == "algos") {
    c.algos.clear();
    for (auto name : split(value, ',')) c.algos.push_back(parse_algo(name));
  } else if (key == "noise") {
    c.noises.clear();
    for (auto name : split(value, ',')) c.noises.push_back(parse_noise(name));
  } else if (key == "d") {
    c.d = parse_number<int>(key, value);
  } else if (key == "K") {
    c.K = parse_number<int>(key, value);
  } else if (key == "T") {
    c.T = parse_number<long>(key, value);
  } else if (key == "eps") {
    c.eps = parse_number<double>(key, value);
  } else if (key == "delta") {
    c.delta = parse_number<double>(key, value);
  } else if (key == "v-central") {
    c.v_central = parse_number<double>(key, value);
  } else if (key == "v-raw") {
    c.v_raw = parse_number<double>(key, value);
  } else if (key == "reps") {
    c.reps = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "fixed-contexts") {
    c.fixed_contexts = parse_bool(key, value);
  } else if (key == "centered-pareto") {
    c.centered_pareto = parse_bool(key, value);
  } else if (key == "full-trace") {
    c.full_trace = parse_bool(key, value);
  } else if (key == "jobs") {
    c.jobs = parse_number<int>(key, value);
  } else if (key == "out") {
    c.out_path = std::string(value);
  } else {
    throw Error(Errc::invalid_parameter, "unknown setting '" + std::string(key) + "'");
  }
}

void apply_config_text(std::string_view text, ExperimentConfig& c) {
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_parameter,
                  "config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), c);
  }
}

void apply_config_file(const std::filesystem::path& path, ExperimentConfig& c) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(ss.str(), c);
}

}  // namespace htlb
