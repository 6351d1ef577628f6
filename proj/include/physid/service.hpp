#pragma once

#include "physid/errors.hpp"
#include "physid/session.hpp"
#include "physid/touch.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace physid {

struct ServiceOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0; // 0 picks a free port
  std::size_t max_sessions = 8;
  double frame_hz = 60.0;
  int viewport_width = 640;
  int viewport_height = 480;
  TouchConfig touch;
  SoftBodyConfig soft;
  std::size_t io_threads = 2;
};

// Wire code for an error frame: "malformed", "session_limit", otherwise the
// snake_case name of the code ("invalid_parameter", ...).
std::string wire_error_code(Errc code);
std::string error_message(std::string_view code, std::string_view detail);

// Protocol state of one connection, independent of the transport.
// Messages are validated on arrival; their effects land at the next tick.
class ProtocolSession {
public:
  ProtocolSession(const ServiceOptions& options, std::uint64_t id);

  // Replies to send right away (loaded / error frames).
  std::vector<std::string> on_message(std::string_view text);
  // One fixed-cadence frame: applies queued input, steps, and returns the
  // state frame. Nothing before a successful load.
  std::optional<std::string> tick();

  [[nodiscard]] bool loaded() const { return session_.has_value(); }
  [[nodiscard]] const SimulationSession* session() const { return session_ ? &*session_ : nullptr; }

private:
  using Queued = std::variant<PointerInput, SessionEvent>;

  std::string handle_load(const nlohmann::json& msg);

  ServiceOptions options_;
  std::uint64_t id_;
  std::optional<SimulationSession> session_;
  std::uint64_t frame_offset_ = 0; // keeps frame numbers increasing across reloads
  std::deque<Queued> inbox_;
  PointerTracker pointer_;
};

std::string state_message(std::uint64_t frame, std::span<const NodeState> states);

// WebSocket server: one ProtocolSession per connection, each stepped by
// its own timer at frame_hz. Extra connections beyond max_sessions get a
// session_limit error and are closed.
class SimService {
public:
  explicit SimService(ServiceOptions options);
  ~SimService();
  SimService(const SimService&) = delete;
  SimService& operator=(const SimService&) = delete;

  // Binds and starts the I/O threads; returns the bound port.
  std::uint16_t start();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();
  [[nodiscard]] std::size_t active_sessions() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace physid
