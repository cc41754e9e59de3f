#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cspc/charts.hpp"
#include "cspc/config.hpp"
#include "cspc/engine.hpp"
#include "cspc/error.hpp"
#include "cspc/parallel.hpp"
#include "cspc/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kRuntime = 3, kIo = 4 };

struct ScenarioArgs {
  std::string config_path;
  std::string preset;
  std::string scenario;
  std::optional<double> sigma;
  std::optional<int> switch_pcc;
  std::optional<std::uint64_t> seed;
  std::optional<int> pccs;
  std::optional<unsigned> workers;
  std::string out;
};

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("CSPC_OUTPUT_DIR"); env && *env) return env;
  return "cspc-out";
}

void add_scenario_options(CLI::App& cmd, ScenarioArgs& a) {
  auto* cfg = cmd.add_option("--config", a.config_path, "Scenario file (.json or .toml)");
  auto* pre = cmd.add_option("--preset", a.preset, "Built-in market: setting1 or setting2");
  cfg->excludes(pre);
  cmd.add_option("--scenario", a.scenario, "Provider behaviour preset (see README)");
  cmd.add_option("--sigma", a.sigma, "Honesty probability after the switch (scenario4)");
  cmd.add_option("--switch-pcc", a.switch_pcc, "Last cycle before the behaviour change");
  cmd.add_option("--seed", a.seed, "Run seed");
  cmd.add_option("--pccs", a.pccs, "Number of price controlling cycles");
  cmd.add_option("--workers", a.workers, "Worker threads");
  cmd.add_option("--out", a.out, "Output directory (default: $CSPC_OUTPUT_DIR or ./cspc-out)");
}

cspc::ScenarioConfig build_config(const ScenarioArgs& a) {
  cspc::ScenarioConfig c;
  if (!a.config_path.empty()) {
    c = cspc::load_config(a.config_path);
  } else if (!a.preset.empty()) {
    c = cspc::preset(a.preset);
  } else {
    throw cspc::ConfigError("preset", "either --config or --preset is required");
  }
  if (!a.scenario.empty()) {
    cspc::apply_scenario(c, a.scenario, a.sigma, a.switch_pcc);
  } else if (a.sigma || a.switch_pcc) {
    throw cspc::ConfigError("scenario", "--sigma and --switch-pcc need --scenario");
  }
  if (a.seed) c.seed = *a.seed;
  if (a.pccs) c.max_pccs = *a.pccs;
  if (a.workers) c.workers = *a.workers;
  c.validate();
  return c;
}

fs::path out_dir(const ScenarioArgs& a) { return a.out.empty() ? default_out_dir() : fs::path(a.out); }

int run_command(const ScenarioArgs& a, const std::string& format, bool charts, bool long_layout) {
  const auto config = build_config(a);
  const auto fmt = cspc::trace_format_from_string(format);
  const auto trace = cspc::run_simulation(config);
  const auto dir = out_dir(a);

  auto files = cspc::export_trace(trace, fmt, dir, long_layout);
  if (charts) {
    const auto svgs = cspc::render_charts(trace, dir);
    files.insert(files.end(), svgs.begin(), svgs.end());
  }

  const auto& last = trace.records.back();
  const std::size_t window = std::min<std::size_t>(30, trace.records.size());
  std::printf("%s  seed=%llu  pccs=%zu\n", config.name.c_str(), static_cast<unsigned long long>(trace.seed),
              trace.records.size());
  std::printf("final sum_abs_error  %s\n", exact(last.sum_abs_error).c_str());
  std::printf("mean price (last %zu) %s  (fair mean %s)\n", window,
              exact(cspc::windowed_mean_price(trace, window)).c_str(),
              exact(cspc::mean_fair_price(config.wnps)).c_str());
  for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
  return kOk;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    const auto item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw cspc::ConfigError("sigma-grid", "not a number: '" + item + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (out.empty()) throw cspc::ConfigError("sigma-grid", "empty grid");
  return out;
}

int sweep_command(ScenarioArgs a, const std::string& grid_text, int replicates) {
  if (replicates < 1) throw cspc::ConfigError("replicates", "must be >= 1");
  if (a.scenario.empty()) a.scenario = "scenario4-probabilistic";
  const auto grid = parse_grid(grid_text);
  const std::uint64_t base_seed = a.seed.value_or(1);
  const unsigned workers = a.workers.value_or(1);

  struct Job {
    double sigma;
    int replicate;
    std::uint64_t seed;
    double final_error = 0.0;
    double windowed_mean = 0.0;
    double fair_mean = 0.0;
  };
  std::vector<Job> jobs;
  std::vector<cspc::ScenarioConfig> configs;
  for (double s : grid) {
    for (int r = 0; r < replicates; ++r) {
      ScenarioArgs one = a;
      one.sigma = s;
      one.seed = base_seed + static_cast<std::uint64_t>(r);
      one.workers = 1;
      configs.push_back(build_config(one));
      jobs.push_back({s, r, *one.seed});
    }
  }

  // Replicates are independent, so parallelism goes across runs here.
  cspc::parallel_for(jobs.size(), workers, [&](std::size_t k) {
    const auto trace = cspc::run_simulation(configs[k]);
    jobs[k].final_error = trace.records.back().sum_abs_error;
    jobs[k].windowed_mean = cspc::windowed_mean_price(trace, std::min<std::size_t>(30, trace.records.size()));
    jobs[k].fair_mean = cspc::mean_fair_price(configs[k].wnps);
  });

  const auto dir = out_dir(a);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw cspc::IoError(dir.string(), "cannot create output directory: " + ec.message());
  const auto path = dir / "sweep.csv";
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw cspc::IoError(path.string(), "cannot open for writing");
  f << "sigma,replicate,seed,final_sum_abs_error,windowed_mean_price,mean_fair_price\n";
  for (const auto& j : jobs)
    f << exact(j.sigma) << ',' << j.replicate << ',' << j.seed << ',' << exact(j.final_error) << ','
      << exact(j.windowed_mean) << ',' << exact(j.fair_mean) << '\n';
  f.close();
  if (!f) throw cspc::IoError(path.string(), "write failed");

  std::printf("%-8s %-6s %-22s %s\n", "sigma", "runs", "median_mean", "median/fair");
  for (double s : grid) {
    std::vector<double> means;
    double fair = 0.0;
    for (const auto& j : jobs)
      if (j.sigma == s) {
        means.push_back(j.windowed_mean);
        fair = j.fair_mean;
      }
    std::sort(means.begin(), means.end());
    const std::size_t n = means.size();
    const double median = n % 2 ? means[n / 2] : 0.5 * (means[n / 2 - 1] + means[n / 2]);
    std::printf("%-8s %-6zu %-22s %s\n", exact(s).c_str(), n, exact(median).c_str(), exact(median / fair).c_str());
  }
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowdsourced price-cap control simulator"};
  app.require_subcommand(1);

  ScenarioArgs run_args;
  std::string format = "csv";
  bool charts = false;
  bool long_layout = false;
  auto* run = app.add_subcommand("run", "Run one simulation and export its trace");
  add_scenario_options(*run, run_args);
  run->add_option("--format", format, "Trace format")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--charts", charts, "Also write prices.svg and error.svg");
  run->add_flag("--long", long_layout, "Also write a one-row-per-provider table");

  ScenarioArgs sweep_args;
  std::string grid = "0.1,0.5,0.9";
  int replicates = 10;
  auto* sweep = app.add_subcommand("sweep", "Replicated runs over a grid of honesty probabilities");
  add_scenario_options(*sweep, sweep_args);
  sweep->add_option("--sigma-grid", grid, "Comma-separated probabilities");
  sweep->add_option("--replicates", replicates, "Seeds per grid point (consecutive from --seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return run_command(run_args, format, charts, long_layout);
    return sweep_command(sweep_args, grid, replicates);
  } catch (const cspc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const cspc::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
}
