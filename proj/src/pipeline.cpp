#include "physid/pipeline.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"
#include "physid/image.hpp"

#include <future>
#include <thread>

namespace physid {
namespace {

using Clock = std::chrono::steady_clock;

template <class T>
struct Timed {
  T value;
  double ms = 0.0;
};

// A client call on its own thread. The thread is detached so a timed-out
// stage never blocks the caller; everything it touches is owned by value
// or by shared pointer.
template <class T>
class Stage {
public:
  Stage(std::string name, std::chrono::milliseconds timeout, std::function<T()> fn)
      : name_(std::move(name)), timeout_(timeout) {
    auto promise = std::make_shared<std::promise<Timed<T>>>();
    future_ = promise->get_future();
    std::thread([promise, fn = std::move(fn)] {
      const auto start = Clock::now();
      try {
        T value = fn();
        const std::chrono::duration<double, std::milli> ms = Clock::now() - start;
        promise->set_value({std::move(value), ms.count()});
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    }).detach();
    deadline_ = Clock::now() + timeout_;
  }

  Timed<T> get() {
    if (future_.wait_until(deadline_) != std::future_status::ready) {
      throw Error(Errc::StageTimeout, name_ + ": no answer within " + std::to_string(timeout_.count()) + " ms");
    }
    return future_.get();
  }

private:
  std::string name_;
  std::chrono::milliseconds timeout_;
  Clock::time_point deadline_;
  std::future<Timed<T>> future_;
};

struct RegionBox {
  std::string id;
  std::array<int, 4> bbox;
};

std::vector<RegionBox> parse_regions(const std::string& text, int width, int height) {
  const auto fail = [&](const std::string& what) {
    throw Error(Errc::ResponseParseFailure, "segment: " + what + "; raw response: \"" + text + "\"");
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    fail("answer is not JSON");
  }
  if (!j.is_object() || !j.contains("regions") || !j.at("regions").is_array()) fail("expected {\"regions\":[...]}");
  std::vector<RegionBox> out;
  for (const auto& r : j.at("regions")) {
    if (!r.is_object() || !r.contains("bbox") || !r.at("bbox").is_array() || r.at("bbox").size() != 4) {
      fail("each region needs a four-number bbox");
    }
    RegionBox box;
    box.id = r.contains("id") && r.at("id").is_string() ? r.at("id").get<std::string>()
                                                         : "region_" + std::to_string(out.size());
    for (int k = 0; k < 4; ++k) {
      if (!r.at("bbox")[k].is_number()) fail("bbox entries must be numbers");
      box.bbox[k] = static_cast<int>(r.at("bbox")[k].get<double>());
    }
    const auto& b = box.bbox;
    if (b[2] <= 0 || b[3] <= 0 || b[0] < 0 || b[1] < 0 || b[0] + b[2] > width || b[1] + b[3] > height) {
      fail("region '" + box.id + "' lies outside the image");
    }
    out.push_back(std::move(box));
  }
  if (out.empty()) fail("no regions");
  return out;
}

std::chrono::milliseconds timeout_for(const PipelineOptions& options, const std::string& stage) {
  const auto it = options.stage_timeouts.find(stage);
  return it == options.stage_timeouts.end() ? options.stage_timeout : it->second;
}

} // namespace

std::string_view to_string(Dynamics d) {
  switch (d) {
  case Dynamics::None: return "none";
  case Dynamics::Soft: return "soft";
  case Dynamics::Rigid: return "rigid";
  }
  return "none";
}

nlohmann::json PipelineResult::to_json(bool include_timings) const {
  nlohmann::json j;
  j["image_id"] = image_id;
  j["image_size"] = {image_width, image_height};
  j["interactable"] = interactable;
  j["interactable_confidence"] = interactable_confidence ? nlohmann::json(*interactable_confidence) : nullptr;
  j["dynamics"] = to_string(dynamics);
  j["properties"] = properties ? material_to_json(*properties) : nlohmann::json(nullptr);
  j["properties_clamped"] = properties_clamped;
  j["static_flags"] = nlohmann::json::array();
  for (const auto& r : static_flags) {
    j["static_flags"].push_back({{"region", r.id}, {"bbox", r.bbox}, {"label", r.is_static ? "static" : "non_static"}});
  }
  j["mesh_path"] = mesh_path;
  j["prompt_strategy"] = to_string(strategy);
  if (include_timings) j["timings_ms"] = timings_ms;
  return j;
}

PipelineResult run_pipeline(const std::filesystem::path& image, const std::shared_ptr<ExternalClient>& client,
                            const PipelineOptions& options) {
  return run_pipeline(read_file(image), image.stem().string(), client, options);
}

PipelineResult run_pipeline(const std::string& image_bytes, const std::string& image_id,
                            const std::shared_ptr<ExternalClient>& client, const PipelineOptions& options) {
  if (!client) throw Error(Errc::ClientUnavailable, "no client configured");
  const Image image = decode_image(image_bytes);
  const auto image_b64 = std::make_shared<const std::string>(base64_encode(image_bytes));
  const PromptSlots slots = load_prompt_slots(options.context_file, image_id);
  const auto prompt = [&](Task task) {
    return load_prompt_template(options.prompt_dir, options.strategy, task).render(slots);
  };

  PipelineResult result;
  result.image_id = image_id;
  result.image_width = image.width;
  result.image_height = image.height;
  result.strategy = options.strategy;

  const auto ask = [&](const std::string& name, Task task, std::string text) {
    return Stage<ClientResponse>(name, timeout_for(options, name), [client, image_b64, task, text = std::move(text)] {
      return client->query({std::string(to_string(task)), text, *image_b64});
    });
  };

  // T1 gates everything else.
  const auto t1 = ask("t1", Task::T1, prompt(Task::T1)).get();
  result.timings_ms["t1"] = t1.ms;
  result.interactable = parse_classification(t1.value.text, interactable_grammar(), "t1") == "yes";
  result.interactable_confidence = t1.value.confidence;
  if (!result.interactable) return result;

  Stage<ClientResponse> mesh_stage("mesh", timeout_for(options, "mesh"),
                                   [client, image_b64] { return client->generate_mesh(*image_b64); });

  const auto t2 = ask("t2", Task::T2, prompt(Task::T2)).get();
  result.timings_ms["t2"] = t2.ms;
  result.dynamics = parse_classification(t2.value.text, dynamics_grammar(), "t2") == "soft" ? Dynamics::Soft
                                                                                            : Dynamics::Rigid;

  if (result.dynamics == Dynamics::Soft) {
    auto t4_stage = ask("t4", Task::T4, prompt(Task::T4));

    struct RegionAnswers {
      std::vector<RegionBox> boxes;
      std::vector<std::string> answers;
      double segment_ms = 0.0;
      double t3_ms = 0.0;
    };
    const std::string t3_prompt = prompt(Task::T3);
    const auto segment_timeout = timeout_for(options, "segment");
    const auto t3_timeout = timeout_for(options, "t3");
    const int width = image.width, height = image.height;
    const auto shared_image = std::make_shared<const Image>(image);
    Stage<RegionAnswers> regions_stage(
        "segment", segment_timeout + t3_timeout,
        [client, image_b64, shared_image, t3_prompt, segment_timeout, t3_timeout, width, height] {
          RegionAnswers out;
          const auto seg = Stage<ClientResponse>("segment", segment_timeout, [client, image_b64] {
                             return client->segment(*image_b64);
                           }).get();
          out.segment_ms = seg.ms;
          out.boxes = parse_regions(seg.value.text, width, height);
          std::vector<Stage<ClientResponse>> labels;
          labels.reserve(out.boxes.size());
          for (const auto& box : out.boxes) {
            const auto crop_b64 = base64_encode(
                encode_png(crop(*shared_image, box.bbox[0], box.bbox[1], box.bbox[2], box.bbox[3])));
            labels.emplace_back("t3", t3_timeout, [client, t3_prompt, crop_b64] {
              return client->classify_region(t3_prompt, crop_b64);
            });
          }
          for (auto& stage : labels) {
            auto answer = stage.get();
            out.t3_ms = std::max(out.t3_ms, answer.ms);
            out.answers.push_back(std::move(answer.value.text));
          }
          return out;
        });

    const auto t4 = t4_stage.get();
    result.timings_ms["t4"] = t4.ms;
    const ParsedProperties parsed = parse_properties(t4.value.text, "t4");
    result.properties = parsed.properties;
    result.properties_clamped = parsed.clamped;

    const auto regions = regions_stage.get();
    result.timings_ms["segment"] = regions.value.segment_ms;
    result.timings_ms["t3"] = regions.value.t3_ms;
    for (std::size_t i = 0; i < regions.value.boxes.size(); ++i) {
      const auto& box = regions.value.boxes[i];
      const bool is_static = parse_classification(regions.value.answers[i], region_grammar(), "t3") == "static";
      result.static_flags.push_back({box.id, box.bbox, is_static});
    }
  }

  const auto mesh = mesh_stage.get();
  result.timings_ms["mesh"] = mesh.ms;
  try {
    result.mesh = parse_obj(mesh.value.text);
  } catch (const Error& e) {
    throw Error(Errc::ResponseParseFailure, "mesh: " + e.detail());
  }
  if (!options.mesh_dir.empty()) {
    const auto path = options.mesh_dir / (image_id + ".obj");
    std::filesystem::create_directories(options.mesh_dir);
    write_file(path, mesh.value.text);
    result.mesh_path = path.string();
  }
  return result;
}

SimulationSession configure_simulation(const PipelineResult& result, const TriMesh& mesh,
                                       const SoftBodyConfig& soft) {
  if (!result.interactable || result.dynamics == Dynamics::None) {
    throw Error(Errc::InconsistentResult, "result '" + result.image_id + "' is not interactable");
  }
  const int width = result.image_width > 0 ? result.image_width : 640;
  const int height = result.image_height > 0 ? result.image_height : 480;
  const Camera camera = default_camera(mesh, width, height);
  if (result.dynamics == Dynamics::Rigid) {
    return SimulationSession(make_body(BodyKind::Rigid, mesh, {}, soft), camera);
  }
  if (!result.properties) throw Error(Errc::InconsistentResult, "soft result without properties");
  auto body = std::make_unique<SoftBody>(mesh, *result.properties, soft);
  Image mask = make_image(width, height, 1);
  bool any = false;
  for (const auto& r : result.static_flags) {
    if (!r.is_static) continue;
    for (int y = r.bbox[1]; y < r.bbox[1] + r.bbox[3]; ++y) {
      for (int x = r.bbox[0]; x < r.bbox[0] + r.bbox[2]; ++x) mask.at(x, y) = 255;
    }
    any = true;
  }
  if (any) body->apply_mask(make_static_mask(mask, camera));
  return SimulationSession(std::move(body), camera);
}

} // namespace physid
