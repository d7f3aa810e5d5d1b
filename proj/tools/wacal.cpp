// wacal command-line front end: calibrate / simulate / evaluate / study.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wacal/calibrate.hpp"
#include "wacal/evaluate.hpp"
#include "wacal/io.hpp"
#include "wacal/simulate.hpp"

namespace fs = std::filesystem;
using namespace wacal;

namespace {

ObservationSet read_obs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return read_observations(in);
}

void print_report(const CalibReport& report) {
  std::cout << "model: " << to_string(report.spec.kind) << "\n";
  std::cout << "rms: " << report.rms << " px over " << report.inliers_used
            << " inliers (" << report.trimmed << " trimmed)\n";
  std::cout << "converged: " << (report.converged ? "yes" : "no") << " in "
            << report.iterations << " iterations\n";
  std::cout << "params:";
  for (Eigen::Index i = 0; i < report.spec.params.size(); ++i)
    std::cout << ' ' << report.spec.params(i);
  std::cout << "\n";
  if (report.param_std_available) {
    std::cout << "std dev:";
    for (Eigen::Index i = 0; i < report.param_std.size(); ++i)
      std::cout << ' ' << report.param_std(i);
    std::cout << "\n";
  }
  if (std::isfinite(report.condition_number))
    std::cout << "condition number: " << report.condition_number << "\n";
}

int max_jobs(int requested) {
  if (const char* env = std::getenv("WACAL_JOBS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) requested = std::min(requested, cap);
  }
  return std::max(1, requested);
}

struct SimFlags {
  double sigma = 0.7;
  int frames = 40;
  double distance_min = 0.4;
  double distance_max = 1.2;
  double max_tilt = 45.0;
  double in_image_fraction = 0.6;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sigma", sigma, "Pixel noise std. dev. per axis");
    cmd->add_option("--frames", frames, "Frames per sequence");
    cmd->add_option("--distance-min", distance_min, "Min camera distance (m)");
    cmd->add_option("--distance-max", distance_max, "Max camera distance (m)");
    cmd->add_option("--max-tilt", max_tilt, "Max tilt from board normal (deg)");
    cmd->add_option("--in-image-fraction", in_image_fraction,
                    "Required fraction of visible target points");
  }

  SimConfig config(std::uint64_t seed) const {
    SimConfig c;
    c.noise_sigma = sigma;
    c.frames = frames;
    c.seed = seed;
    c.pose_sampler.distance_min = distance_min;
    c.pose_sampler.distance_max = distance_max;
    c.pose_sampler.max_tilt_deg = max_tilt;
    c.pose_sampler.in_image_fraction = in_image_fraction;
    return c;
  }
};

struct CalibFlags {
  std::string loss = "huber";
  double loss_scale = 1.0;
  double trim = 2.0;
  int trim_rounds = 2;
  int max_iterations = 100;

  void attach(CLI::App* cmd) {
    cmd->add_option("--loss", loss, "Robust loss: none|huber|cauchy");
    cmd->add_option("--loss-scale", loss_scale, "Loss scale in pixels");
    cmd->add_option("--trim", trim, "Trim threshold in pixels");
    cmd->add_option("--trim-rounds", trim_rounds, "Outlier trimming rounds");
    cmd->add_option("--max-iterations", max_iterations, "LM iteration cap");
  }

  CalibConfig config(ModelKind kind) const {
    CalibConfig c;
    c.model_kind = kind;
    const auto lk = loss_kind_from_string(loss);
    if (!lk) throw std::runtime_error("unknown loss: " + loss);
    c.loss.kind = *lk;
    c.loss.scale = loss_scale;
    c.trim_threshold = trim;
    c.trim_rounds = trim_rounds;
    c.max_lm_iterations = max_iterations;
    return c;
  }
};

int cmd_calibrate(const std::string& model, const std::string& target_path,
                  const std::string& obs_path, const std::string& out_path,
                  int width, int height, const CalibFlags& flags) {
  const auto kind = model_kind_from_string(model);
  if (!kind) {
    std::cerr << "unknown model kind: " << model << "\n";
    return 1;
  }
  const TargetLayout target = target_from_json(read_json_file(target_path));
  const ObservationSet obs = read_obs_file(obs_path);
  const CalibConfig config = flags.config(*kind);
  const CalibReport report = calibrate(obs, target, width, height, config);
  write_text_file(out_path, report_to_json(report, config).dump(2) + "\n");
  print_report(report);
  return report.converged ? 0 : 2;
}

int cmd_simulate(const std::string& truth_path, const std::string& target_path,
                 std::uint64_t seed, const std::string& out_dir,
                 const SimFlags& flags) {
  const CameraSpec spec = spec_from_json(read_json_file(truth_path));
  const TargetLayout target = target_from_json(read_json_file(target_path));
  const SimResult sim = simulate(spec, target, flags.config(seed));
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "observations.jsonl");
    if (!out) throw std::runtime_error("cannot write observations.jsonl");
    write_observations(out, sim.observations);
  }
  write_text_file((fs::path(out_dir) / "truth.json").string(),
                  truth_to_json(sim).dump(2) + "\n");
  std::cout << sim.observations.frames.size() << " frames, "
            << sim.observations.total_corners() << " corners -> " << out_dir
            << "\n";
  return 0;
}

int cmd_evaluate(const std::string& report_path, const std::string& truth_path,
                 const std::string& group, const std::string& out_path) {
  const CalibReport report = report_from_json(read_json_file(report_path));
  const json tj = read_json_file(truth_path);
  const CameraSpec truth =
      spec_from_json(tj.contains("spec") ? tj.at("spec") : tj);
  const RunScore score = score_run(report, truth, group);
  json j;
  j["group"] = score.group;
  j["model"] = score.model;
  j["param_errors"] = std::vector<double>(
      score.param_errors.data(),
      score.param_errors.data() + score.param_errors.size());
  j["focal_error_max"] = score.focal_error_max;
  j["rms"] = score.rms;
  j["failed"] = score.failed;
  j["failure_reason"] = to_string(score.failure_reason);
  if (!out_path.empty()) write_text_file(out_path, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_study(const std::string& truth_path, const std::string& target_path,
              const std::string& models_csv, int seeds,
              const std::string& out_dir, int jobs, const SimFlags& sim_flags,
              const CalibFlags& calib_flags, const std::string& group) {
  const CameraSpec truth = spec_from_json(read_json_file(truth_path));
  const TargetLayout target = target_from_json(read_json_file(target_path));

  std::vector<ModelKind> kinds;
  std::stringstream ss(models_csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto kind = model_kind_from_string(tok);
    if (!kind) {
      std::cerr << "unknown model kind: " << tok << "\n";
      return 1;
    }
    kinds.push_back(*kind);
  }
  if (kinds.empty()) {
    std::cerr << "no models given\n";
    return 1;
  }
  fs::create_directories(out_dir);

  struct Task {
    std::uint64_t seed;
    ModelKind kind;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < seeds; ++s)
    for (ModelKind kind : kinds) tasks.push_back({static_cast<std::uint64_t>(s), kind});

  std::vector<RunScore> scores(tasks.size());
  std::mutex io_mutex;
  std::atomic<size_t> next{0};
  std::atomic<bool> hard_error{false};

  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < tasks.size();
         i = next.fetch_add(1)) {
      const Task& task = tasks[i];
      RunScore score;
      score.group = group;
      score.model = to_string(task.kind);
      try {
        const SimResult sim =
            simulate(truth, target, sim_flags.config(task.seed));
        CalibReport report;
        bool solved = false;
        try {
          report = calibrate(sim.observations, target, truth.width,
                             truth.height, calib_flags.config(task.kind));
          solved = true;
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(io_mutex);
          std::cerr << "seed " << task.seed << " " << to_string(task.kind)
                    << ": " << e.what() << "\n";
        }
        if (solved && report.spec.kind == truth.kind) {
          score = score_run(report, truth, group);
        } else if (solved) {
          // cross-model run: focal comparison only
          score.rms = report.rms;
          score.param_errors = Eigen::VectorXd::Zero(0);
          const double dfx = std::abs(comparable_focal(report.spec, 0) -
                                      comparable_focal(truth, 0));
          const double dfy = std::abs(comparable_focal(report.spec, 1) -
                                      comparable_focal(truth, 1));
          score.focal_error_max = std::max(dfx, dfy);
          if (!report.converged) {
            score.failed = true;
            score.failure_reason = FailureReason::NonConvergence;
          } else if (score.focal_error_max >= 100.0) {
            score.failed = true;
            score.failure_reason = FailureReason::FocalRule;
          }
        } else {
          score.failed = true;
          score.failure_reason = FailureReason::NoSolution;
          score.param_errors = Eigen::VectorXd::Zero(0);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << "seed " << task.seed << ": " << e.what() << "\n";
        hard_error = true;
        return;
      }
      scores[i] = std::move(score);
    }
  };

  const int n_threads =
      std::min(max_jobs(jobs), static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (hard_error) return 1;

  const StudySummary summary = aggregate(scores);
  write_text_file((fs::path(out_dir) / "summary.csv").string(),
                  summary_to_csv(summary));
  write_text_file((fs::path(out_dir) / "failures.tsv").string(),
                  failures_to_tsv(summary));
  std::cout << failures_to_tsv(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wide-angle camera calibration toolkit"};
  app.require_subcommand(1);

  // calibrate
  std::string model, target_path, obs_path, out_path, truth_path, report_path;
  std::string models_csv, group = "study", out_dir, score_out;
  int width = 1600, height = 1200, seeds = 9, jobs = 4;
  std::uint64_t seed = 0;
  SimFlags sim_flags;
  CalibFlags calib_flags;

  auto* cal = app.add_subcommand("calibrate", "Calibrate from observations");
  cal->add_option("--model", model, "Camera model kind")->required();
  cal->add_option("--target", target_path, "Target JSON")->required();
  cal->add_option("--obs", obs_path, "Observations JSONL")->required();
  cal->add_option("--out", out_path, "Report JSON output")->required();
  cal->add_option("--width", width, "Image width (px)");
  cal->add_option("--height", height, "Image height (px)");
  calib_flags.attach(cal);

  auto* sim = app.add_subcommand("simulate", "Synthesize noisy observations");
  sim->add_option("--truth", truth_path, "Ground-truth camera JSON")->required();
  sim->add_option("--target", target_path, "Target JSON")->required();
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim_flags.attach(sim);

  auto* ev = app.add_subcommand("evaluate", "Score a report against truth");
  ev->add_option("--report", report_path, "Calibration report JSON")->required();
  ev->add_option("--truth", truth_path, "Truth JSON (spec or truth record)")
      ->required();
  ev->add_option("--group", group, "Group label");
  ev->add_option("--out", score_out, "Score JSON output");

  auto* study = app.add_subcommand("study", "Seeded simulate-calibrate-score");
  study->add_option("--truth", truth_path, "Ground-truth camera JSON")
      ->required();
  study->add_option("--target", target_path, "Target JSON")->required();
  study->add_option("--models", models_csv, "Comma-separated model kinds")
      ->required();
  study->add_option("--seeds", seeds, "Number of seeds");
  study->add_option("--jobs", jobs, "Max concurrent seeds (capped by WACAL_JOBS)");
  study->add_option("--group", group, "Group label");
  study->add_option("--out", out_dir, "Output directory")->required();
  sim_flags.attach(study);
  calib_flags.attach(study);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cal->parsed())
      return cmd_calibrate(model, target_path, obs_path, out_path, width,
                           height, calib_flags);
    if (sim->parsed())
      return cmd_simulate(truth_path, target_path, seed, out_dir, sim_flags);
    if (ev->parsed())
      return cmd_evaluate(report_path, truth_path, group, score_out);
    if (study->parsed())
      return cmd_study(truth_path, target_path, models_csv, seeds, out_dir,
                       jobs, sim_flags, calib_flags, group);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
