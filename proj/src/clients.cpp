#include "telextiles/clients.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "telextiles/errors.hpp"
#include "telextiles/service.hpp"

namespace telextiles {

ServiceClient::ServiceClient(Endpoint server, std::chrono::milliseconds timeout)
    : server_(std::move(server)), timeout_(timeout) {}

nlohmann::json ServiceClient::request(const std::string& body) {
  std::optional<std::string> reply;
  try {
    if (!connection_) connection_.emplace(Connection::connect(server_, timeout_));
    connection_->send_message(body);
    reply = connection_->receive_message();
  } catch (const TransportError&) {
    connection_.reset();
    throw;
  }
  if (!reply) {
    connection_.reset();
    throw TransportError("server closed the connection");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(*reply);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unparseable response: ") + e.what());
  }
  if (doc.value("type", "") == "ERROR") {
    const auto code = doc.value("code", "");
    const auto kind = code == "not_found"     ? ServiceError::Code::NotFound
                      : code == "unavailable" ? ServiceError::Code::Unavailable
                                              : ServiceError::Code::BadRequest;
    throw ServiceError(kind, doc.value("message", code));
  }
  return doc;
}

nlohmann::json ServiceClient::submit(const std::vector<Image>& frames) { return request(make_submit_request(frames)); }

nlohmann::json ServiceClient::match(std::int64_t id) { return request(make_match_request(id)); }

int ServiceClient::poll() { return request(make_poll_request()).at("slot").get<int>(); }

std::int64_t run_sensor_client(const SensorOptions& options, std::ostream& out) {
  std::vector<TactileFrame> session;
  if (options.dataset) {
    const Dataset data = load_dataset(*options.dataset);
    for (std::size_t i = 0; i < data.manifest.sessions.size(); ++i) {
      if (options.sample_id.empty() || data.manifest.sessions[i].sample_id == options.sample_id) {
        session = data.frames[i];
        break;
      }
    }
    if (session.empty()) throw ValidationError("no session for sample " + options.sample_id);
  } else {
    session = simulate_acquisition(options.sample_id.empty() ? "query" : options.sample_id, options.texture,
                                   options.acquisition, options.seed);
  }
  if (options.frames > 0 && options.frames < static_cast<int>(session.size())) session.resize(options.frames);

  std::vector<Image> frames;
  frames.reserve(session.size());
  for (auto& f : session) frames.push_back(std::move(f.pixels));

  ServiceClient client(options.server, options.timeout);
  const auto submitted = client.submit(frames);
  const auto id = submitted.at("id").get<std::int64_t>();
  out << submitted.dump() << "\n" << client.match(id).dump() << "\n";
  return id;
}

std::chrono::milliseconds SystemClock::now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch());
}

EmulatedMotor::EmulatedMotor(RollerConfig cfg, MotorState initial) : cfg_(std::move(cfg)), state_(initial) {}

std::string EmulatedMotor::transact(const std::string& frame) {
  received_.push_back(frame);
  auto result = apply_command(state_, frame, cfg_);
  state_ = result.state;
  return result.reply;
}

TcpSerialLink::TcpSerialLink(const Endpoint& endpoint, std::chrono::milliseconds timeout)
    : connection_(Connection::connect(endpoint, timeout)) {}

std::string TcpSerialLink::transact(const std::string& frame) {
  connection_.send_raw(frame);
  auto reply = connection_.read_line(256);
  if (!reply) throw TransportError("serial peer closed the link");
  return *reply;
}

MotorEmulatorServer::MotorEmulatorServer(RollerConfig cfg, const Endpoint& bind)
    : cfg_(std::move(cfg)), listener_(bind) {
  thread_ = std::thread([this] {
    // Serial semantics: one peer at a time, commands strictly in order.
    while (!stopping_) {
      Socket s = listener_.accept(std::chrono::milliseconds(50));
      if (!s.valid()) continue;
      Connection conn(std::move(s), std::chrono::milliseconds(100));
      while (!stopping_) {
        std::optional<std::string> line;
        try {
          line = conn.read_line(256);
        } catch (const TransportError& e) {
          if (std::string(e.what()).find("timed out") != std::string::npos) continue;
          break;
        }
        if (!line) break;
        std::string reply;
        {
          std::lock_guard lock(mutex_);
          auto result = apply_command(state_, *line, cfg_);
          state_ = result.state;
          reply = result.reply;
        }
        try {
          conn.send_raw(reply);
        } catch (const TransportError&) {
          break;
        }
      }
    }
  });
}

MotorEmulatorServer::~MotorEmulatorServer() { stop(); }

void MotorEmulatorServer::stop() {
  if (stopping_.exchange(true)) return;
  if (thread_.joinable()) thread_.join();
}

MotorState MotorEmulatorServer::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

ActuatorClient::ActuatorClient(PollFn poll, SerialLink& link, RollerConfig roller, MotorState initial,
                               std::ostream* log)
    : poll_(std::move(poll)), link_(link), roller_(std::move(roller)), motor_(initial), log_(log) {
  roller_.validate();
}

bool ActuatorClient::step() {
  ++stats_.polls;
  int target = 0;
  try {
    target = poll_();
  } catch (const TransportError& e) {
    ++stats_.poll_failures;
    if (log_) *log_ << "poll failed: " << e.what() << "\n";
    return false;
  } catch (const ServiceError& e) {
    ++stats_.poll_failures;
    if (log_) *log_ << "poll rejected: " << e.what() << "\n";
    return false;
  }
  if (target < 0 || target >= roller_.slot_count()) {
    ++stats_.poll_failures;
    if (log_) *log_ << "ignoring out-of-range target " << target << "\n";
    return false;
  }
  const int from = slot();
  if (from == target) return false;

  const SlotMove move = goto_slot(motor_, target, roller_);
  const std::string reply = link_.transact(move.frame);
  if (reply.rfind("OK ", 0) != 0) {
    std::string reason = reply;
    if (!reason.empty() && reason.back() == '\n') reason.pop_back();
    throw ActuatorError("actuator rejected " + move.frame.substr(0, move.frame.size() - 1) + ": " + reason);
  }
  const double delta = decode_command(move.frame);
  const StepPlan plan = plan_steps(delta, roller_);
  const std::string expected = std::string("OK ") + to_string(plan.direction) + " " + std::to_string(plan.step_count) + "\n";
  if (reply != expected) throw ActuatorError("unexpected actuator reply: " + reply);

  motor_ = move.predicted;
  ++stats_.commands;
  stats_.max_rotation_deg = std::max(stats_.max_rotation_deg, std::abs(delta));
  if (log_)
    *log_ << "slot " << from << " -> " << target << " (" << move.frame.substr(0, move.frame.size() - 1) << ", "
          << reply.substr(0, reply.size() - 1) << ")\n";
  return true;
}

void ActuatorClient::run(Clock& clock, std::chrono::milliseconds interval, int cycles, const std::atomic<bool>* stop) {
  for (int i = 0; cycles <= 0 || i < cycles; ++i) {
    if (stop && stop->load()) break;
    step();
    clock.sleep_for(interval);
  }
}

}  // namespace telextiles
