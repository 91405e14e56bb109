// Copyright 2026 The pairswarm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pairswarm: run scenarios, generate goals, sweep parameters, verify the
// oracle suites, export traces.
//
// Exit codes: 0 success, 1 usage or spec error, 2 controlled run failure
// (stall or timeout; for sweep and verify, any failing run or suite).

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pairswarm/oracles.hpp"
#include "pairswarm/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace pairswarm;

namespace {

constexpr int kOk = 0;
constexpr int kSpecError = 1;
constexpr int kRunFailure = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, eps, max_time;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the scenario seed");
    cmd->add_option("--dt", dt, "Override the time step [s]");
    cmd->add_option("--eps", eps, "Override the connection tolerance [m]");
    cmd->add_option("--max-time", max_time, "Override the simulated time limit [s]");
  }
  void apply(ScenarioSpec& s) const {
    if (seed) s.seed = *seed;
    if (dt) s.dt = *dt;
    if (eps) s.eps = *eps;
    if (max_time) s.max_time = *max_time;
  }
};

/// Parses, applies overrides, validates. Prints diagnostics on failure.
std::optional<ScenarioSpec> load_spec(const ScenarioParse& parsed, const Overrides& ov,
                                      const std::string& origin) {
  if (!parsed.ok()) {
    std::cerr << origin << ": invalid scenario\n" << format_errors(parsed.errors);
    return std::nullopt;
  }
  ScenarioSpec spec = parsed.spec;
  ov.apply(spec);
  if (const auto errs = validate(spec); !errs.empty()) {
    std::cerr << origin << ": invalid scenario\n" << format_errors(errs);
    return std::nullopt;
  }
  return spec;
}

struct RunOutcome {
  int code = kOk;
  RunReport report;
  std::string error;
};

RunOutcome run_to_dir(const ScenarioSpec& spec, const fs::path& out_dir, bool write_trace) {
  RunOutcome out;
  fs::create_directories(out_dir);
  std::ofstream trace;
  if (write_trace) trace.open(out_dir / "trace.jsonl", std::ios::binary | std::ios::trunc);
  try {
    out.report = run(spec, [&](const TraceRecord& rec) {
      if (write_trace) trace << trace_line(rec) << '\n';
    });
  } catch (const std::runtime_error& e) {
    // The start generator could not place the robots.
    out.code = kSpecError;
    out.error = e.what();
    return out;
  }
  std::ofstream(out_dir / "report.json", std::ios::binary | std::ios::trunc)
      << report_to_json(out.report).dump(2) << '\n';
  out.code = out.report.success ? kOk : kRunFailure;
  return out;
}

int cmd_run(const std::string& path, const std::string& out_dir, const Overrides& ov,
            bool no_trace) {
  const auto spec = load_spec(load_scenario(path, false), ov, path);
  if (!spec) return kSpecError;
  const RunOutcome r = run_to_dir(*spec, out_dir, !no_trace);
  if (!r.error.empty()) {
    std::cerr << path << ": " << r.error << '\n';
    return r.code;
  }
  const auto& rep = r.report;
  std::printf("%s: %s after %.2f s (%d ticks), %zu pairs, max pair error %.6f m, procrustes %.6f m%s%s\n",
              spec->name.empty() ? path.c_str() : spec->name.c_str(),
              rep.success ? "formed" : "failed", rep.completion_time, rep.ticks, rep.pairs.size(),
              rep.max_pair_error, rep.procrustes_residual, rep.diagnostic.empty() ? "" : ", ",
              rep.diagnostic.c_str());
  return r.code;
}

int cmd_generate(const std::vector<std::string>& args, const std::string& out, double body_length) {
  auto usage = [] {
    std::cerr << "usage: generate line N | generate mesh ROWS COLS\n";
    return kSpecError;
  };
  auto to_int = [](const std::string& s) -> std::optional<int> {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) return std::nullopt;
      return v;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  if (args.empty()) return usage();
  const BodyGeometry geom = BodyGeometry::standard(body_length);
  GoalConfiguration goal;
  std::string label;
  if (args[0] == "line" && args.size() == 2) {
    const auto n = to_int(args[1]);
    if (!n || *n < 2) {
      std::cerr << "generate line: N must be an integer >= 2\n";
      return kSpecError;
    }
    goal = make_line(*n, geom);
    label = "line " + args[1];
  } else if (args[0] == "mesh" && args.size() == 3) {
    const auto r = to_int(args[1]), c = to_int(args[2]);
    if (!r || !c || *r < 1 || *c < 1 || *r * *c < 2) {
      std::cerr << "generate mesh: ROWS and COLS must be positive with at least 2 robots\n";
      return kSpecError;
    }
    goal = make_mesh(*r, *c, geom);
    label = "mesh " + args[1] + " " + args[2];
  } else {
    return usage();
  }
  const std::string doc = goal_to_json(goal, label, geom).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << doc;
  } else {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) {
      std::cerr << "cannot write " << out << '\n';
      return kSpecError;
    }
    f << doc;
  }
  return kOk;
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_sweep(const std::string& path, const std::string& axis, const std::string& values_csv,
              const std::string& out_dir, int jobs, int seeds, const Overrides& ov) {
  const auto values = split_values(values_csv);
  if (values.empty()) {
    std::cerr << "sweep: empty value list\n";
    return kSpecError;
  }
  if (seeds < 1 || jobs < 1) {
    std::cerr << "sweep: --seeds and --jobs must be positive\n";
    return kSpecError;
  }
  const auto base = load_scenario(path, false);
  if (!base.ok()) {
    std::cerr << path << ": invalid scenario\n" << format_errors(base.errors);
    return kSpecError;
  }
  const Json full = scenario_to_json(base.spec);
  Json::json_pointer ptr;
  try {
    std::string p = "/" + axis;
    std::replace(p.begin(), p.end(), '.', '/');
    ptr = Json::json_pointer(p);
  } catch (const std::exception&) {
    std::cerr << "sweep: bad axis '" << axis << "'\n";
    return kSpecError;
  }
  if (!full.contains(ptr) || full.at(ptr).is_object() || full.at(ptr).is_array()) {
    std::cerr << "sweep: axis '" << axis << "' is not a scalar field of this scenario\n";
    return kSpecError;
  }

  // Instantiate and validate every run before starting any.
  struct Job {
    std::string value;
    int seed_index;
    ScenarioSpec spec;
    fs::path dir;
  };
  std::vector<Job> queue;
  for (const auto& v : values) {
    Json doc = full;
    Json parsed_value;
    try {
      parsed_value = Json::parse(v);
    } catch (const Json::parse_error&) {
      parsed_value = v;
    }
    doc[ptr] = parsed_value;
    const auto inst = load_spec(parse_scenario(doc, false), ov, axis + "=" + v);
    if (!inst) return kSpecError;
    for (int k = 0; k < seeds; ++k) {
      ScenarioSpec s = *inst;
      s.seed = inst->seed + static_cast<std::uint64_t>(k);
      fs::path dir = fs::path(out_dir) / (axis + "=" + v);
      if (seeds > 1) dir /= "seed" + std::to_string(s.seed);
      queue.push_back({v, k, std::move(s), dir});
    }
  }

  std::vector<RunOutcome> results(queue.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < queue.size();)
      results[i] = run_to_dir(queue[i].spec, queue[i].dir, true);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, static_cast<int>(queue.size()));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "summary.csv", std::ios::binary | std::ios::trunc);
  csv << "axis,value,runs,success_rate,mean_completion_time,max_pair_error\n";
  bool all_ok = true;
  std::size_t i = 0;
  for (const auto& v : values) {
    int ok = 0, errors = 0;
    double t_sum = 0.0, err = 0.0;
    for (int k = 0; k < seeds; ++k, ++i) {
      const auto& r = results[i];
      if (!r.error.empty()) {
        ++errors;
        std::cerr << axis << "=" << v << ": " << r.error << '\n';
        continue;
      }
      ok += r.report.success;
      if (r.report.success) t_sum += r.report.completion_time;
      err = std::max(err, r.report.max_pair_error);
    }
    all_ok = all_ok && ok == seeds;
    csv.precision(10);
    csv << axis << ',' << v << ',' << seeds << ',' << static_cast<double>(ok) / seeds << ','
        << (ok > 0 ? t_sum / ok : 0.0) << ',' << err << '\n';
    std::printf("%s=%s: %d/%d formed%s\n", axis.c_str(), v.c_str(), ok, seeds,
                errors ? " (some runs could not start)" : "");
  }
  return all_ok ? kOk : kRunFailure;
}

int cmd_verify(const std::string& mutate, std::uint64_t seed) {
  oracle::Hooks hooks;
  if (mutate == "hungarian") {
    hooks.hungarian = oracle::mutated_hungarian;
  } else if (mutate == "mst") {
    hooks.mst = [](const std::vector<Vec2>& pts) {
      auto tree = minimum_spanning_tree(pts);
      // Replace the heaviest edge by the longest edge of the complete graph.
      if (pts.size() >= 3 && !tree.empty()) {
        double far = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (std::size_t j = i + 1; j < pts.size(); ++j) far = std::max(far, (pts[i] - pts[j]).norm());
        tree.back().weight = far;
      }
      return tree;
    };
  } else if (mutate == "linearization") {
    hooks.linearize = [](const Pose2D& pose, const Vec2& offset) {
      auto lp = linearize_point(pose, offset);
      lp.coeff.col(1) *= 0.5;
      return lp;
    };
  } else if (!mutate.empty()) {
    std::cerr << "verify: unknown mutation '" << mutate << "' (hungarian, mst, linearization)\n";
    return kSpecError;
  }
  bool all = true;
  for (const auto& r : oracle::run_all(hooks, seed)) {
    std::printf("%-14s %s  %d/%d cases%s%s\n", r.name.c_str(), r.passed() ? "PASS" : "FAIL",
                r.cases - r.failures, r.cases, r.detail.empty() ? "" : "  ", r.detail.c_str());
    all = all && r.passed();
  }
  return all ? kOk : kRunFailure;
}

int cmd_export(const std::string& trace_path, const std::string& out) {
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << trace_path << '\n';
    return kSpecError;
  }
  try {
    if (out.empty() || out == "-") {
      trace_to_csv(in, std::cout);
    } else {
      std::ofstream f(out, std::ios::binary | std::ios::trunc);
      trace_to_csv(in, f);
    }
  } catch (const std::exception& e) {
    std::cerr << trace_path << ": " << e.what() << '\n';
    return kSpecError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairswarm: kinematic simulator for puzzle-coupling robot swarms"};
  app.require_subcommand(1);

  Overrides run_ov, sweep_ov;
  std::string scenario, out_dir = "run_out";
  bool no_trace = false;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trace.jsonl and report.json");
  run_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  run_cmd->add_option("out_dir", out_dir, "Output directory")->capture_default_str();
  run_cmd->add_flag("--no-trace", no_trace, "Skip writing the trace");
  run_ov.add_to(run_cmd);

  std::vector<std::string> gen_args;
  std::string gen_out;
  double body_length = 0.05;
  auto* gen_cmd = app.add_subcommand("generate", "Write a goal configuration: line N | mesh ROWS COLS");
  gen_cmd->add_option("shape", gen_args, "line N | mesh ROWS COLS")->required();
  gen_cmd->add_option("-o,--out", gen_out, "Output file (default stdout)");
  gen_cmd->add_option("--body-length", body_length, "Body length [m]")->capture_default_str();

  std::string sweep_template, axis, values, sweep_out = "sweep_out";
  int jobs = 1, seeds = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a template once per value of one field");
  sweep_cmd->add_option("template", sweep_template, "Scenario JSON template")->required();
  sweep_cmd->add_option("--axis", axis, "Dotted field path, e.g. k_bias or goal.n")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_option("-o,--out", sweep_out, "Output directory")->capture_default_str();
  sweep_cmd->add_option("--jobs", jobs, "Parallel runs")->capture_default_str();
  sweep_cmd->add_option("--seeds", seeds, "Consecutive seeds per value")->capture_default_str();
  sweep_ov.add_to(sweep_cmd);

  std::string mutate;
  std::uint64_t verify_seed = 20260101;
  auto* verify_cmd = app.add_subcommand("verify", "Check the algorithms against brute-force oracles");
  verify_cmd->add_option("--mutate", mutate, "Seed a known bug: hungarian, mst, linearization");
  verify_cmd->add_option("--seed", verify_seed, "Instance seed")->capture_default_str();

  std::string trace_path, export_out;
  auto* export_cmd = app.add_subcommand("export", "Convert a trace to CSV, one row per tick");
  export_cmd->add_option("trace", trace_path, "trace.jsonl")->required();
  export_cmd->add_option("-o,--out", export_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kSpecError;
  }

  if (*run_cmd) return cmd_run(scenario, out_dir, run_ov, no_trace);
  if (*gen_cmd) return cmd_generate(gen_args, gen_out, body_length);
  if (*sweep_cmd) return cmd_sweep(sweep_template, axis, values, sweep_out, jobs, seeds, sweep_ov);
  if (*verify_cmd) return cmd_verify(mutate, verify_seed);
  if (*export_cmd) return cmd_export(trace_path, export_out);
  return kSpecError;
}
