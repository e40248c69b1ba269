#include "htlb/cli.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "htlb/error.hpp"
#include "htlb/harness.hpp"

namespace htlb {

namespace {

void print_summary(const std::vector<RegretTrace>& traces, const ExperimentConfig& c,
                   std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-8s %16s %12s\n", "noise", "algo", "final_regret",
                "stderr");
  out << line;
  for (NoiseKind n : c.noises) {
    for (Algo a : c.algos) {
      std::vector<RegretTrace> group;
      for (const RegretTrace& t : traces) {
        if (t.algo == a && t.noise == n) group.push_back(t);
      }
      const AggregateSeries agg = aggregate(group);
      std::snprintf(line, sizeof line, "%-12s %-8s %16.4f %12.4f\n",
                    std::string(to_string(n)).c_str(), std::string(to_string(a)).c_str(),
                    agg.mean.back(), agg.stderr_.back());
      out << line;
    }
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heavy-tailed linear bandit regret simulator"};
  app.name("htlb_sim");

  // Valued options, keyed by the setting name they map onto.
  std::map<std::string, std::string> values;
  const std::pair<const char*, const char*> valued[] = {
      {"algos", "Comma-separated subset of supbmm,supbtc,mom,crt,menu,tofu"},
      {"noise", "Comma-separated subset of student_t,pareto,adversarial,none"},
      {"d", "Feature dimension"},
      {"K", "Number of arms"},
      {"T", "Horizon in pulls"},
      {"eps", "Moment order parameter in (0, 1]"},
      {"delta", "Confidence parameter in (0, 1)"},
      {"v-central", "Central-moment bound (default depends on noise)"},
      {"v-raw", "Raw-moment bound (default depends on noise)"},
      {"reps", "Independent repetitions per algorithm"},
      {"seed", "Base seed"},
      {"jobs", "Worker threads (0 = all cores)"},
      {"out", "Output CSV path"},
  };
  for (const auto& [name, help] : valued) {
    app.add_option(std::string("--") + name, values[name], help);
  }
  std::map<std::string, bool> flags;
  const std::pair<const char*, const char*> switches[] = {
      {"fixed-contexts", "Draw the contexts once and reuse them every round"},
      {"centered-pareto", "Subtract the Pareto mean from the noise"},
      {"full-trace", "Write every pull instead of ~1000 samples per trace"},
  };
  for (const auto& [name, help] : switches) {
    app.add_flag(std::string("--") + name, flags[name], help);
  }
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; explicit flags take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) apply_config_file(config_path, config);
    for (const auto& [name, help] : valued) {
      if (app.count(std::string("--") + name) > 0) apply_setting(name, values[name], config);
    }
    for (const auto& [name, help] : switches) {
      if (app.count(std::string("--") + name) > 0) apply_setting(name, "true", config);
    }
    validate(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::io ? 2 : 1;
  }

  try {
    const std::vector<RegretTrace> traces = run_all(config);
    write_csv(traces, config.out_path, config.full_trace);
    print_summary(traces, config, out);
    out << "wrote " << config.out_path << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == Errc::io ? 2 : 1;
  }
  return 0;
}

}  // namespace htlb
