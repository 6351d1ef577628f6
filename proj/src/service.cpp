#include "physid/service.hpp"

#include "physid/codec.hpp"
#include "physid/image.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <thread>

namespace physid {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

std::string wire_error_code(Errc code) {
  switch (code) {
  case Errc::MalformedMessage: return "malformed";
  case Errc::SessionLimitExceeded: return "session_limit";
  default: break;
  }
  std::string out;
  for (char c : to_string(code)) {
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (!out.empty()) out += '_';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += c;
    }
  }
  return out;
}

std::string error_message(std::string_view code, std::string_view detail) {
  return nlohmann::json{{"type", "error"}, {"code", code}, {"detail", detail}}.dump();
}

std::string state_message(std::uint64_t frame, std::span<const NodeState> states) {
  std::string out = "{\"type\":\"state\",\"frame\":" + std::to_string(frame) + ",\"positions\":[";
  char buf[96];
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vec3& p = states[i].position;
    std::snprintf(buf, sizeof buf, "%s[%.9g,%.9g,%.9g]", i ? "," : "", static_cast<double>(static_cast<float>(p.x())),
                  static_cast<double>(static_cast<float>(p.y())), static_cast<double>(static_cast<float>(p.z())));
    out += buf;
  }
  out += "]}";
  return out;
}

namespace {

[[noreturn]] void malformed(const std::string& detail) { throw Error(Errc::MalformedMessage, detail); }

const nlohmann::json& field(const nlohmann::json& msg, const char* name) {
  const auto it = msg.find(name);
  if (it == msg.end()) malformed(std::string("missing field '") + name + "'");
  return *it;
}

double number_field(const nlohmann::json& msg, const char* name) {
  const auto& v = field(msg, name);
  if (!v.is_number()) malformed(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::string string_field(const nlohmann::json& msg, const char* name) {
  const auto& v = field(msg, name);
  if (!v.is_string()) malformed(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

} // namespace

ProtocolSession::ProtocolSession(const ServiceOptions& options, std::uint64_t id) : options_(options), id_(id) {}

std::string ProtocolSession::handle_load(const nlohmann::json& msg) {
  const std::string source = string_field(msg, "mesh");
  const std::string body = msg.contains("body") ? string_field(msg, "body") : "soft";
  if (body != "soft" && body != "rigid") malformed("body must be \"soft\" or \"rigid\"");
  MaterialProperties material;
  if (msg.contains("material")) {
    if (!msg.at("material").is_object()) malformed("material must be an object");
    material = material_from_json(msg.at("material"));
  }
  TriMesh mesh = load_mesh_source(source);
  const Camera camera = default_camera(mesh, options_.viewport_width, options_.viewport_height);
  auto made = make_body(body == "soft" ? BodyKind::Soft : BodyKind::Rigid, std::move(mesh), material, options_.soft);

  if (session_) frame_offset_ += session_->frame();
  session_.emplace(std::move(made), camera, id_);
  inbox_.clear();
  pointer_ = PointerTracker{};

  nlohmann::json reply = {{"type", "loaded"}, {"nodes", session_->body().mesh().node_count()}};
  reply["faces"] = nlohmann::json::array();
  for (const Face& f : session_->body().mesh().faces()) reply["faces"].push_back({f[0], f[1], f[2]});
  reply["camera"] = camera_to_json(camera);
  return reply.dump();
}

std::vector<std::string> ProtocolSession::on_message(std::string_view text) {
  try {
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      malformed("frame is not JSON");
    }
    if (!msg.is_object()) malformed("message must be a JSON object");
    const std::string type = string_field(msg, "type");
    if (type == "load") return {handle_load(msg)};
    if (type != "pointer" && type != "set_material" && type != "set_mask") malformed("unknown type '" + type + "'");
    if (!session_) return {error_message("not_loaded", "send a load message first")};

    if (type == "pointer") {
      PointerInput p;
      p.phase = pointer_phase_from_string(string_field(msg, "phase"));
      p.x = number_field(msg, "x");
      p.y = number_field(msg, "y");
      p.strength = msg.contains("strength") ? number_field(msg, "strength") : 1.0;
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.strength)) malformed("non-finite pointer");
      inbox_.emplace_back(p);
    } else if (type == "set_material") {
      inbox_.emplace_back(SessionEvent(material_from_json(msg)));
    } else {
      if (session_->kind() != BodyKind::Soft) throw Error(Errc::InvalidParameter, "masks apply to soft bodies only");
      const auto bytes = base64_decode(string_field(msg, "png_b64"));
      inbox_.emplace_back(SessionEvent(MaskUpdate{decode_image({reinterpret_cast<const char*>(bytes.data()), bytes.size()}),
                                                  std::nullopt}));
    }
    return {};
  } catch (const Error& e) {
    return {error_message(wire_error_code(e.code()), e.detail())};
  }
}

std::optional<std::string> ProtocolSession::tick() {
  if (!session_) return std::nullopt;
  try {
    const auto states = session_->body().node_states();
    while (!inbox_.empty()) {
      Queued item = std::move(inbox_.front());
      inbox_.pop_front();
      if (auto* p = std::get_if<PointerInput>(&item)) {
        if (auto impulse = pointer_.handle(*p, session_->camera(), session_->body().mesh(), states, options_.touch)) {
          session_->enqueue(*impulse);
        }
      } else {
        session_->enqueue(std::move(std::get<SessionEvent>(item)));
      }
    }
    session_->step_frame();
    return state_message(frame_offset_ + session_->frame(), session_->body().node_states());
  } catch (const Error& e) {
    // The body cannot continue; the connection stays open for a new load.
    frame_offset_ += session_->frame();
    session_.reset();
    return error_message(wire_error_code(e.code()), e.detail());
  }
}

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
  Connection(tcp::socket socket, const ServiceOptions& options, std::uint64_t id, std::atomic<std::size_t>& active,
             bool over_limit)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), protocol_(options, id), active_(active),
        over_limit_(over_limit),
        period_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / options.frame_hz))) {}

  ~Connection() {
    if (!over_limit_) --active_;
  }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    if (over_limit_) {
      closing_ = true;
      send(error_message("session_limit", "server is at its session limit"));
      return;
    }
    read();
    next_tick_ = std::chrono::steady_clock::now() + period_;
    schedule_tick();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      stopped_ = true;
      timer_.cancel();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    for (auto& reply : protocol_.on_message(text)) send(std::move(reply));
    read();
  }

  void schedule_tick() {
    timer_.expires_at(next_tick_);
    timer_.async_wait(beast::bind_front_handler(&Connection::on_tick, shared_from_this()));
  }

  void on_tick(beast::error_code ec) {
    if (ec || stopped_) return;
    // Fixed cadence on absolute deadlines; a late tick does not shift later ones.
    next_tick_ += period_;
    if (auto state = protocol_.tick()) {
      // A slow reader gets the newest snapshot rather than an unbounded backlog.
      if (outbox_.size() > 2 && outbox_.back().rfind("{\"type\":\"state\"", 0) == 0) outbox_.pop_back();
      send(std::move(*state));
    }
    schedule_tick();
  }

  void send(std::string text) {
    outbox_.push_back(std::move(text));
    if (outbox_.size() == 1) write_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()), beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      stopped_ = true;
      timer_.cancel();
      return;
    }
    outbox_.pop_front();
    if (!outbox_.empty()) {
      write_next();
    } else if (closing_) {
      ws_.async_close(websocket::close_code::try_again_later, [self = shared_from_this()](beast::error_code) {});
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  ProtocolSession protocol_;
  std::atomic<std::size_t>& active_;
  bool over_limit_;
  bool closing_ = false;
  bool stopped_ = false;
  std::chrono::steady_clock::duration period_;
  std::chrono::steady_clock::time_point next_tick_;
  std::deque<std::string> outbox_;
};

} // namespace

struct SimService::Impl {
  explicit Impl(ServiceOptions o) : options(std::move(o)), acceptor(ioc) {}
  ~Impl() { acceptor.close(); }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      // Reserve a slot; roll back when full so the count stays exact.
      const bool over = ++active > options.max_sessions;
      if (over) --active;
      std::make_shared<Connection>(std::move(socket), options, next_id++, active, over)->start();
      accept();
    });
  }

  ServiceOptions options;
  // Outlives ioc: pending handlers own connections that decrement it.
  std::atomic<std::size_t> active{0};
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::uint64_t next_id = 1;
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;
};

SimService::SimService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (!(impl_->options.frame_hz > 0.0)) throw Error(Errc::InvalidParameter, "frame rate must be positive");
  if (impl_->options.max_sessions == 0) throw Error(Errc::InvalidParameter, "max sessions must be at least 1");
}

SimService::~SimService() { stop(); }

std::uint16_t SimService::start() {
  auto& im = *impl_;
  beast::error_code ec;
  const tcp::endpoint endpoint(net::ip::make_address(im.options.address, ec), im.options.port);
  if (ec) throw Error(Errc::InvalidParameter, "bad address '" + im.options.address + "'");
  im.acceptor.open(endpoint.protocol(), ec);
  if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor.bind(endpoint, ec);
  if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::InvalidParameter, "cannot listen on port " + std::to_string(im.options.port) + ": " + ec.message());
  im.accept();
  for (std::size_t i = 0; i < std::max<std::size_t>(1, im.options.io_threads); ++i) {
    im.threads.emplace_back([&im] { im.ioc.run(); });
  }
  return im.acceptor.local_endpoint().port();
}

void SimService::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

void SimService::stop() {
  auto& im = *impl_;
  {
    std::lock_guard lock(im.mutex);
    if (im.stopped) return;
    im.stopped = true;
  }
  im.ioc.stop();
  for (auto& t : im.threads) {
    if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
  }
  im.stopped_cv.notify_all();
}

std::size_t SimService::active_sessions() const { return impl_->active.load(); }

} // namespace physid
