// physid command line: pipeline, eval, simulate, serve.

#include "physid/codec.hpp"
#include "physid/errors.hpp"
#include "physid/eval.hpp"
#include "physid/pipeline.hpp"
#include "physid/service.hpp"
#include "physid/session.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

using namespace physid;

namespace {

std::atomic<bool> g_interrupted{false};

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::InvalidParameter, path.string() + ": " + e.what());
  }
}

void emit(const nlohmann::json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (!out.empty()) write_file(out, text);
  std::cout << text;
}

struct PipelineArgs {
  std::string image, fixtures, endpoint, strategy = "zero_shot", out, context, prompts;
  int timeout_ms = 120000;
  bool timings = true;
};

int run_pipeline_cmd(const PipelineArgs& a) {
  std::shared_ptr<ExternalClient> client;
  if (a.endpoint.empty()) {
    client = std::make_shared<FixtureClient>(a.fixtures);
  } else {
    client = std::make_shared<RecordingClient>(a.fixtures, std::make_shared<HttpClient>(a.endpoint));
  }
  PipelineOptions options;
  options.strategy = prompt_strategy_from_string(a.strategy);
  if (!a.prompts.empty()) options.prompt_dir = a.prompts;
  options.context_file = !a.context.empty() ? std::filesystem::path(a.context)
                                            : std::filesystem::path(a.fixtures) / "context.json";
  options.stage_timeout = std::chrono::milliseconds(a.timeout_ms);
  options.mesh_dir = std::filesystem::path(a.out).parent_path();
  if (options.mesh_dir.empty()) options.mesh_dir = ".";
  const PipelineResult result = run_pipeline(std::filesystem::path(a.image), client, options);
  const std::string text = result.to_json(a.timings).dump(2) + "\n";
  write_file(a.out, text);
  std::cout << text;
  return 0;
}

struct EvalArgs {
  std::string task, pred, truth, weights, positive, out;
};

nlohmann::json image_eval(const std::filesystem::path& pred, const std::filesystem::path& truth) {
  if (!std::filesystem::is_directory(truth)) {
    const auto m = eval::image_metrics(load_image(pred), load_image(truth));
    return {{"l1", m.l1}, {"l2", m.l2}, {"psnr", eval::metric_value(m.psnr)}, {"ssim", m.ssim}};
  }
  // Directories: mean over files present in the truth directory.
  double l1 = 0, l2 = 0, psnr = 0, ssim = 0;
  std::size_t n = 0;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(truth)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& t : files) {
    const auto m = eval::image_metrics(load_image(pred / t.filename()), load_image(t));
    l1 += m.l1;
    l2 += m.l2;
    psnr += m.psnr;
    ssim += m.ssim;
    ++n;
  }
  if (n == 0) throw Error(Errc::EmptyInput, "no images in " + truth.string());
  const double k = static_cast<double>(n);
  return {{"l1", l1 / k}, {"l2", l2 / k}, {"psnr", eval::metric_value(psnr / k)}, {"ssim", ssim / k}, {"count", n}};
}

int run_eval_cmd(const EvalArgs& a) {
  if (a.task == "image") {
    emit(image_eval(a.pred, a.truth), a.out);
    return 0;
  }
  const auto pred = read_json(a.pred);
  const auto truth = read_json(a.truth);
  if (a.task == "t4") {
    auto preds = eval::join_properties(pred, truth);
    if (!a.weights.empty()) preds.weights = eval::parse_weights(read_json(a.weights));
    emit({{"w_mse", eval::weighted_mse(preds)}, {"w_mae", eval::weighted_mae(preds)}, {"count", preds.samples.size()}},
         a.out);
    return 0;
  }
  std::string positive = a.positive;
  if (positive.empty()) positive = a.task == "t1" ? "yes" : a.task == "t2" ? "soft" : "static";
  const auto s = eval::classification_scores(eval::join_labels(pred, truth, positive));
  emit({{"f1", s.f1}, {"precision", s.precision}, {"recall", s.recall}, {"count", s.tp + s.fp + s.fn + s.tn}}, a.out);
  return 0;
}

struct SimulateArgs {
  std::string mesh, material, mask, camera, script, out, body = "soft", environment;
  std::uint64_t steps = 0;
  double dt = kFrameDt;
  int substeps = kSubsteps;
  double mass = 0.0;
  std::vector<double> gravity = {0.0, -9.81, 0.0};
};

int run_simulate_cmd(const SimulateArgs& a) {
  BatchOptions o;
  o.mesh = a.mesh;
  o.body = a.body == "rigid" ? BodyKind::Rigid : BodyKind::Soft;
  if (!a.material.empty()) o.material = load_material(a.material);
  if (!a.camera.empty()) o.camera = camera_from_json(read_json(a.camera));
  if (!a.mask.empty()) o.mask = MaskUpdate{load_image(a.mask), o.camera};
  if (!a.script.empty()) o.script = load_event_script(a.script);
  o.steps = a.steps;
  o.frame_dt = a.dt;
  o.substeps = a.substeps;
  o.soft.total_mass = a.mass;
  o.soft.gravity = Vec3(a.gravity[0], a.gravity[1], a.gravity[2]);
  if (!a.environment.empty()) o.soft.environment = environment_from_json(read_json(a.environment));
  if (o.body == BodyKind::Rigid && a.mass > 0.0) throw Error(Errc::InvalidParameter, "--mass applies to soft bodies");
  run_batch(o, std::filesystem::path(a.out));
  return 0;
}

int run_serve_cmd(const ServiceOptions& options) {
  SimService service(options);
  const auto port = service.start();
  std::fprintf(stderr, "physid serve: listening on ws://%s:%u\n", options.address.c_str(), port);
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.stop();
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"physid: soft/rigid body simulation, pipeline orchestration and evaluation"};
  app.require_subcommand(1);

  PipelineArgs pa;
  auto* pipeline = app.add_subcommand("pipeline", "classify an image and configure its simulation");
  pipeline->add_option("--image", pa.image, "input image (PNG/PGM/PPM)")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--fixtures", pa.fixtures, "fixture directory (<task>/<sha256>.json)")->required();
  pipeline->add_option("--endpoint", pa.endpoint, "live model endpoint URL; answers are recorded as fixtures");
  pipeline->add_option("--strategy", pa.strategy, "prompt strategy")
      ->check(CLI::IsMember({"zero_shot", "few_shot", "cot", "few_shot_cot"}));
  pipeline->add_option("--out", pa.out, "result JSON")->required();
  pipeline->add_option("--context", pa.context, "prompt slot file (default <fixtures>/context.json)");
  pipeline->add_option("--prompts", pa.prompts, "prompt template directory");
  pipeline->add_option("--timeout-ms", pa.timeout_ms, "per-stage deadline")->check(CLI::PositiveNumber);
  pipeline->add_flag("!--no-timings", pa.timings, "leave stage timings out of the result");

  EvalArgs ea;
  auto* evalc = app.add_subcommand("eval", "score predictions against ground truth");
  evalc->add_option("--task", ea.task, "t1|t2|t3 (F1), t4 (w-MSE/w-MAE), image (L1/L2/PSNR/SSIM)")
      ->required()
      ->check(CLI::IsMember({"t1", "t2", "t3", "t4", "image"}));
  evalc->add_option("--pred", ea.pred, "predictions (JSON, image or image directory)")->required();
  evalc->add_option("--truth", ea.truth, "ground truth (JSON, image or image directory)")->required();
  evalc->add_option("--weights", ea.weights, "t4 weights JSON (five numbers summing to 1)");
  evalc->add_option("--positive", ea.positive, "positive class label (default yes/soft/static)");
  evalc->add_option("--out", ea.out, "also write the metrics here");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "run a scripted batch simulation to a CSV trajectory");
  simulate->add_option("--mesh", sa.mesh, "OBJ file or built-in name (cloth, flag, cube, sphere, cylinder, plant)")
      ->required();
  simulate->add_option("--material", sa.material, "material JSON (five properties)");
  simulate->add_option("--mask", sa.mask, "static mask PNG/PGM");
  simulate->add_option("--camera", sa.camera, "camera JSON for the mask");
  simulate->add_option("--script", sa.script, "event script JSON");
  simulate->add_option("--steps", sa.steps, "frames to simulate")->required();
  simulate->add_option("--dt", sa.dt, "frame duration in seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--substeps", sa.substeps, "substeps per frame")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sa.out, "trajectory CSV")->required();
  simulate->add_option("--body", sa.body, "soft or rigid")->check(CLI::IsMember({"soft", "rigid"}));
  simulate->add_option("--gravity", sa.gravity, "gravity vector")->expected(3);
  simulate->add_option("--environment", sa.environment, "collision environment JSON");
  simulate->add_option("--mass", sa.mass, "soft body total mass in kg (default 0.1 kg per node)");

  ServiceOptions so;
  auto* serve = app.add_subcommand("serve", "serve live sessions over WebSocket");
  serve->add_option("--port", so.port, "TCP port")->required();
  serve->add_option("--max-sessions", so.max_sessions, "concurrent session limit")->check(CLI::PositiveNumber);
  serve->add_option("--address", so.address, "bind address");
  serve->add_option("--hz", so.frame_hz, "stepping rate")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pipeline) return run_pipeline_cmd(pa);
    if (*evalc) return run_eval_cmd(ea);
    if (*simulate) return run_simulate_cmd(sa);
    if (*serve) return run_serve_cmd(so);
  } catch (const Error& e) {
    std::fprintf(stderr, "physid: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "physid: %s\n", e.what());
    return 1;
  }
  return 0;
}
