#include "physid/clients.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"

#include <httplib.h>

#include <regex>

namespace physid {

nlohmann::json ClientRequest::to_json() const {
  return {{"task", task}, {"prompt", prompt}, {"image_b64", image_b64}};
}

std::string ClientRequest::key() const { return sha256_hex(to_json().dump()); }

nlohmann::json ClientResponse::to_json() const {
  nlohmann::json j = {{"text", text}};
  if (confidence) j["confidence"] = *confidence;
  return j;
}

ClientResponse validate_response(const nlohmann::json& j, std::string_view task) {
  const auto fail = [&](const std::string& what) {
    throw Error(Errc::ResponseParseFailure, std::string(task) + ": " + what + "; raw response: " + j.dump());
  };
  if (!j.is_object()) fail("response must be a JSON object");
  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) fail("response needs a string field \"text\"");
  ClientResponse out{text->get<std::string>(), std::nullopt};
  if (const auto c = j.find("confidence"); c != j.end() && !c->is_null()) {
    if (!c->is_number()) fail("\"confidence\" must be a number");
    out.confidence = c->get<double>();
  }
  return out;
}

ClientResponse ExternalClient::query(const ClientRequest& request) {
  {
    std::lock_guard lock(log_mutex_);
    log_.push_back({request.task, request.key()});
  }
  return do_query(request);
}

ClientResponse ExternalClient::classify_interactable(const std::string& prompt, const std::string& image_b64) {
  return query({"t1", prompt, image_b64});
}

ClientResponse ExternalClient::classify_dynamics(const std::string& prompt, const std::string& image_b64) {
  return query({"t2", prompt, image_b64});
}

ClientResponse ExternalClient::classify_region(const std::string& prompt, const std::string& crop_b64) {
  return query({"t3", prompt, crop_b64});
}

ClientResponse ExternalClient::estimate_properties(const std::string& prompt, const std::string& image_b64) {
  return query({"t4", prompt, image_b64});
}

ClientResponse ExternalClient::generate_mesh(const std::string& image_b64) {
  return query({"mesh", std::string(kMeshPrompt), image_b64});
}

ClientResponse ExternalClient::segment(const std::string& image_b64) {
  return query({"segment", std::string(kSegmentPrompt), image_b64});
}

std::vector<CallRecord> ExternalClient::call_log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

void ExternalClient::clear_call_log() {
  std::lock_guard lock(log_mutex_);
  log_.clear();
}

std::filesystem::path fixture_path(const std::filesystem::path& dir, const ClientRequest& request) {
  return dir / request.task / (request.key() + ".json");
}

void write_fixture(const std::filesystem::path& dir, const ClientRequest& request, const ClientResponse& response) {
  const auto path = fixture_path(dir, request);
  std::filesystem::create_directories(path.parent_path());
  const nlohmann::json j = {{"request", request.to_json()}, {"response", response.to_json()}};
  write_file(path, j.dump(2) + "\n");
}

FixtureClient::FixtureClient(std::filesystem::path dir) : dir_(std::move(dir)) {}

ClientResponse FixtureClient::do_query(const ClientRequest& request) {
  const auto path = fixture_path(dir_, request);
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::ClientUnavailable, request.task + ": no fixture at " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ResponseParseFailure, request.task + ": fixture " + path.string() + " is not JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("response")) {
    throw Error(Errc::ResponseParseFailure, request.task + ": fixture " + path.string() + " lacks \"response\"");
  }
  return validate_response(j.at("response"), request.task);
}

HttpClient::HttpClient(std::string url, std::chrono::milliseconds timeout) : timeout_(timeout) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error(Errc::InvalidParameter, "endpoint must be http://host[:port][/path]");
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

ClientResponse HttpClient::do_query(const ClientRequest& request) {
  // httplib clients are not shareable across threads; one per call.
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const auto res = client.Post(path_, request.to_json().dump(), "application/json");
  if (!res) {
    throw Error(Errc::ClientUnavailable,
                request.task + ": " + origin_ + path_ + " unreachable (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::ClientUnavailable, request.task + ": endpoint returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(Errc::ResponseParseFailure, request.task + ": response is not JSON; raw response: " + res->body);
  }
  return validate_response(j, request.task);
}

RecordingClient::RecordingClient(std::filesystem::path dir, std::shared_ptr<ExternalClient> live)
    : dir_(std::move(dir)), live_(std::move(live)) {}

ClientResponse RecordingClient::do_query(const ClientRequest& request) {
  if (std::filesystem::exists(fixture_path(dir_, request)) || !live_) return FixtureClient(dir_).query(request);
  ClientResponse response = live_->query(request);
  std::lock_guard lock(write_mutex_);
  write_fixture(dir_, request, response);
  return response;
}

} // namespace physid
