#pragma once

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace physid {

// Task names on the wire: t1, t2, t3, t4, segment, mesh.
struct ClientRequest {
  std::string task;
  std::string prompt;
  std::string image_b64;

  [[nodiscard]] nlohmann::json to_json() const;
  // sha256 of the compact, key-sorted JSON form.
  [[nodiscard]] std::string key() const;
};

struct ClientResponse {
  std::string text;
  std::optional<double> confidence;

  [[nodiscard]] nlohmann::json to_json() const;
};

// Shared response schema for live and fixture answers:
// {"text": string, "confidence"?: number}. Throws ResponseParseFailure.
ClientResponse validate_response(const nlohmann::json& j, std::string_view task);

struct CallRecord {
  std::string task;
  std::string key;
};

// One interface for every external model. Implementations must tolerate
// concurrent query() calls.
class ExternalClient {
public:
  virtual ~ExternalClient() = default;

  ClientResponse query(const ClientRequest& request);

  ClientResponse classify_interactable(const std::string& prompt, const std::string& image_b64);
  ClientResponse classify_dynamics(const std::string& prompt, const std::string& image_b64);
  ClientResponse classify_region(const std::string& prompt, const std::string& crop_b64);
  ClientResponse estimate_properties(const std::string& prompt, const std::string& image_b64);
  // Answer text is Wavefront OBJ.
  ClientResponse generate_mesh(const std::string& image_b64);
  // Answer text is JSON {"regions":[{"id":s,"bbox":[x,y,w,h]},...]}.
  ClientResponse segment(const std::string& image_b64);

  // Every query issued through this client, in issue order.
  [[nodiscard]] std::vector<CallRecord> call_log() const;
  void clear_call_log();

protected:
  virtual ClientResponse do_query(const ClientRequest& request) = 0;

private:
  mutable std::mutex log_mutex_;
  std::vector<CallRecord> log_;
};

inline constexpr std::string_view kSegmentPrompt = "Segment the object into its distinct physical parts.";
inline constexpr std::string_view kMeshPrompt = "Reconstruct a closed triangle mesh of the main object.";

std::filesystem::path fixture_path(const std::filesystem::path& dir, const ClientRequest& request);
// Writes {"request":..., "response":...} to <dir>/<task>/<key>.json.
void write_fixture(const std::filesystem::path& dir, const ClientRequest& request, const ClientResponse& response);

// Offline replay. A missing fixture throws ClientUnavailable.
class FixtureClient final : public ExternalClient {
public:
  explicit FixtureClient(std::filesystem::path dir);

protected:
  ClientResponse do_query(const ClientRequest& request) override;

private:
  std::filesystem::path dir_;
};

// POSTs {"task","prompt","image_b64"} to the endpoint URL and reads {"text"}.
// Transport failures and non-2xx statuses throw ClientUnavailable.
class HttpClient final : public ExternalClient {
public:
  explicit HttpClient(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(60));

protected:
  ClientResponse do_query(const ClientRequest& request) override;

private:
  std::string origin_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

// Replays a fixture when one exists, otherwise asks the live client and
// records its answer as a new fixture. Without a live client this is
// plain replay.
class RecordingClient final : public ExternalClient {
public:
  RecordingClient(std::filesystem::path dir, std::shared_ptr<ExternalClient> live);

protected:
  ClientResponse do_query(const ClientRequest& request) override;

private:
  std::filesystem::path dir_;
  std::shared_ptr<ExternalClient> live_;
  std::mutex write_mutex_;
};

} // namespace physid
