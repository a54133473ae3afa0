// rmd: command-line front end.
//
//   rmd validate --plan P --scene S
//   rmd encode   --plan P --scene S [--seed N] --out DIR
//   rmd run      --plan P --scene S [--seed N] --out DIR
//   rmd batch    --plan P [--plan P2 ...] --scene S --trials N [--jobs J] --out DIR
//   rmd prompt   --scene S --instruction TEXT --out FILE
//   rmd plan     --scene S --instruction TEXT [--live] --out FILE
//
// Exit codes: 0 ok, 1 input parse error, 2 validation failure, 3 runtime fault.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rmd/rmd.hpp"
#include "rmd/planner_http.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kParseError = 1, kInvalid = 2, kFault = 3 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

rmd::Plan load_plan_file(const std::string& path) {
  std::string text;
  try {
    text = rmd::read_text_file(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  try {
    return rmd::parse_plan(text);
  } catch (const rmd::PlanError& e) {
    throw InputError(path + ": " + e.what());
  }
}

rmd::Scene load_scene_file(const std::string& path) {
  std::string text;
  try {
    text = rmd::read_text_file(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  try {
    return rmd::load_scene(text);
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

// <out>/<UTC yyyymmddThhmmssZ>_seed<seed>, with a numeric suffix on collision.
fs::path make_run_dir(const fs::path& out, const std::string& seed_tag) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = std::string(stamp) + "_seed" + seed_tag;
  fs::path dir = out / base;
  for (int i = 1; fs::exists(dir); ++i) dir = out / (base + "-" + std::to_string(i));
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  rmd::write_text_file(path, j.dump(2) + "\n");
}

nlohmann::ordered_json placement_json(const rmd::Placement& p) {
  nlohmann::ordered_json j;
  j["orientation"] = p.orientation;
  j["distance"] = p.distance;
  j["bearing"] = p.bearing;
  j["scale"] = p.scale;
  j["finish_angle"] = p.finish_angle;
  return j;
}

struct RunOptions {
  std::string scene;
  std::vector<std::string> plans;
  std::int64_t seed = 0;
  bool as_authored = false;
  int trials = 64;
  unsigned jobs = 1;
  double threshold = 0.9;
  std::string weighting = "adaptive";
  std::string out = "runs";
};

rmd::ExecutorConfig executor_config(const RunOptions& o) {
  rmd::ExecutorConfig c;
  c.transition_threshold = o.threshold;
  c.weighting = o.weighting == "uniform" ? rmd::WeightingMode::Uniform : rmd::WeightingMode::Adaptive;
  return c;
}

std::optional<std::uint64_t> trial_seed(const RunOptions& o, int offset) {
  if (o.as_authored) return std::nullopt;
  return std::uint64_t(o.seed) + std::uint64_t(offset);
}

int cmd_validate(const RunOptions& o) {
  const rmd::Plan plan = load_plan_file(o.plans.front());
  const rmd::Scene scene = load_scene_file(o.scene);
  const auto report = rmd::validate_plan(plan, scene);
  for (const auto& v : report) std::cout << v.to_string() << "\n";
  if (!report.empty()) return kInvalid;
  std::cout << "ok: " << plan.steps.size() << " steps\n";
  return kOk;
}

int check_plan(const rmd::Plan& plan, const rmd::Scene& scene) {
  const auto report = rmd::validate_plan(plan, scene);
  for (const auto& v : report) std::cerr << v.to_string() << "\n";
  return report.empty() ? kOk : kInvalid;
}

int cmd_run(const RunOptions& o, bool goals_only) {
  const rmd::Plan plan = load_plan_file(o.plans.front());
  const rmd::Scene scene = load_scene_file(o.scene);
  if (int rc = check_plan(plan, scene)) return rc;

  const rmd::TrialResult r = rmd::run_trial({&plan, &scene, trial_seed(o, 0)}, executor_config(o));
  const fs::path dir = make_run_dir(o.out, o.as_authored ? "none" : std::to_string(o.seed));
  if (goals_only) {
    const std::size_t k = rmd::max_edges(plan);
    std::vector<std::string> header{"frame", "stage_index"};
    for (auto& name : rmd::goal_slot_names(k)) header.push_back(name);
    std::vector<std::vector<double>> rows;
    for (const auto& f : r.trace.frames) {
      std::vector<double> row{double(f.index), double(f.status.stage_index)};
      const auto g = f.goal;
      // Pad the edge block so that every row lines up with the widest step.
      row.insert(row.end(), g.rmd_block.begin(), g.rmd_block.end());
      row.resize(2 + k * rmd::kEdgeFeatureSize, 0.0);
      const auto flat = g.flatten();
      row.insert(row.end(), flat.begin() + std::ptrdiff_t(g.rmd_block.size()), flat.end());
      rows.push_back(std::move(row));
    }
    std::ofstream os(dir / "goals.csv", std::ios::binary);
    rmd::write_goal_csv(os, header, rows);
  } else {
    std::ofstream os(dir / "trace.csv", std::ios::binary);
    rmd::write_reward_trace_csv(os, r.trace, plan);
  }
  if (!r.trace.frames.empty()) {
    auto summary = rmd::episode_summary(r.trace, r.outcome);
    if (r.placement) summary["placement"] = placement_json(*r.placement);
    write_json(dir / "summary.json", summary);
  }
  std::cout << dir.string() << "\n";
  if (r.fault) {
    std::cerr << "fault: " << *r.fault << "\n";
    return kFault;
  }
  return kOk;
}

int cmd_batch(const RunOptions& o) {
  if (o.trials < 1) throw CLI::ValidationError("--trials", "must be at least 1");
  const rmd::Scene scene = load_scene_file(o.scene);
  std::vector<rmd::Plan> plans;
  for (const auto& p : o.plans) plans.push_back(load_plan_file(p));

  std::vector<rmd::TrialSpec> specs;
  for (const auto& plan : plans) {
    for (int i = 0; i < o.trials; ++i) specs.push_back({&plan, &scene, trial_seed(o, i)});
  }
  const auto results = rmd::run_trials(specs, executor_config(o), o.jobs);
  const rmd::MetricsReport report = rmd::summarize(results);

  const fs::path dir = make_run_dir(o.out, o.as_authored ? "none" : std::to_string(o.seed));
  nlohmann::ordered_json trials = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    nlohmann::ordered_json t;
    t["plan"] = o.plans[i / std::size_t(o.trials)];
    t["seed"] = specs[i].seed ? nlohmann::ordered_json(*specs[i].seed) : nlohmann::ordered_json(nullptr);
    if (r.fault) {
      t["fault"] = *r.fault;
    } else {
      t["summary"] = rmd::episode_summary(r.trace, r.outcome);
    }
    trials.push_back(std::move(t));
  }
  nlohmann::ordered_json j;
  j["report"] = rmd::to_json(report);
  j["trials"] = std::move(trials);
  write_json(dir / "report.json", j);
  const std::string table = rmd::format_report_table(report);
  rmd::write_text_file(dir / "report.txt", table);
  std::cout << table << dir.string() << "\n";
  return report.faults == int(results.size()) ? kFault : kOk;
}

rmd::PromptBundle prompt_for(const std::string& scene_path, const std::string& instruction,
                             const std::string& templates, const std::string& image, rmd::Scene& scene) {
  scene = load_scene_file(scene_path);
  return rmd::build_prompt(instruction, scene, rmd::load_templates(templates), image);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan validation, execution and scoring for relative-movement-dynamics interaction plans"};
  app.require_subcommand(1);

  RunOptions opt;
  std::string instruction, templates = RMD_DATA_DIR "/templates", fixtures = RMD_DATA_DIR "/planner_fixtures";
  std::string image, prompt_out;
  bool live = false;
  int vlm_timeout = 60;

  auto add_plan = [&](CLI::App* c, bool many) {
    auto* o = c->add_option("--plan", opt.plans, many ? "Plan JSON (repeatable)" : "Plan JSON")
                  ->required()
                  ->check(CLI::ExistingFile);
    if (!many) o->expected(1);
  };
  auto add_scene = [&](CLI::App* c) {
    c->add_option("--scene", opt.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  };
  auto add_exec = [&](CLI::App* c) {
    c->add_option("--seed", opt.seed, "Placement seed (first trial in a batch)")->capture_default_str();
    c->add_flag("--as-authored", opt.as_authored, "Skip randomized placement");
    c->add_option("--threshold", opt.threshold, "Stage transition threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    c->add_option("--weighting", opt.weighting, "Edge weighting")
        ->check(CLI::IsMember({"uniform", "adaptive"}))
        ->capture_default_str();
    c->add_option("--out", opt.out, "Output root; each run gets its own directory")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check a plan against a scene");
  add_plan(validate, false);
  add_scene(validate);

  auto* encode = app.add_subcommand("encode", "Run an episode and write one goal-state row per frame");
  add_plan(encode, false);
  add_scene(encode);
  add_exec(encode);

  auto* run = app.add_subcommand("run", "Run one episode and write its reward trace and summary");
  add_plan(run, false);
  add_scene(run);
  add_exec(run);

  auto* batch = app.add_subcommand("batch", "Run seeded trials and write a metrics report");
  add_plan(batch, true);
  add_scene(batch);
  add_exec(batch);
  batch->add_option("--trials", opt.trials, "Trials per plan")->capture_default_str();
  batch->add_option("--jobs", opt.jobs, "Parallel trials")->check(CLI::PositiveNumber)->capture_default_str();

  auto add_prompt_opts = [&](CLI::App* c) {
    add_scene(c);
    c->add_option("--instruction", instruction, "Task instruction")->required();
    c->add_option("--templates", templates, "Prompt template directory")->capture_default_str();
    c->add_option("--image", image, "Top-view image passed to the planner");
    c->add_option("--out", prompt_out, "Output file")->required();
  };
  auto* prompt = app.add_subcommand("prompt", "Write the assembled planner prompt");
  add_prompt_opts(prompt);

  auto* plan = app.add_subcommand("plan", "Obtain a plan from the fixture store or a live endpoint");
  add_prompt_opts(plan);
  plan->add_option("--fixtures", fixtures, "Fixture store directory")->capture_default_str();
  plan->add_flag("--live", live, "Query RMD_VLM_URL and record the exchange in the fixture store");
  plan->add_option("--vlm-timeout-s", vlm_timeout, "Endpoint timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParseError;
  }

  try {
    if (*validate) return cmd_validate(opt);
    if (*encode) return cmd_run(opt, true);
    if (*run) return cmd_run(opt, false);
    if (*batch) return cmd_batch(opt);
    if (*prompt) {
      rmd::Scene scene;
      const auto bundle = prompt_for(opt.scene, instruction, templates, image, scene);
      rmd::write_text_file(prompt_out, bundle.render());
      return kOk;
    }
    if (*plan) {
      rmd::Scene scene;
      const auto bundle = prompt_for(opt.scene, instruction, templates, image, scene);
      rmd::PlannerTransport transport;
      if (live) {
        const auto endpoint = rmd::endpoint_from_env(vlm_timeout);
        if (!endpoint) throw std::runtime_error("--live needs RMD_VLM_URL");
        transport = rmd::http_transport(*endpoint);
      }
      const auto response = rmd::request_plan(bundle, scene.scene_id, fixtures, transport);
      std::cerr << "provenance: " << rmd::to_token(response.provenance) << "\n";
      if (!response.plan) {
        std::cerr << "parse error: " << *response.parse_error << "\n";
        return kParseError;
      }
      rmd::write_text_file(prompt_out, rmd::serialize_plan(*response.plan));
      return check_plan(*response.plan, scene);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kParseError;
  } catch (const InputError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFault;
  }
  return kFault;
}
