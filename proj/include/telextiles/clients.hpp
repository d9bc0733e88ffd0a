#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "telextiles/roller.hpp"
#include "telextiles/tactile_data.hpp"
#include "telextiles/wire.hpp"

namespace telextiles {

// Request/response client for the matching service. Reconnects lazily after a
// transport failure.
class ServiceClient {
 public:
  explicit ServiceClient(Endpoint server, std::chrono::milliseconds timeout = std::chrono::seconds(5));

  nlohmann::json request(const std::string& body);  // throws TransportError, ServiceError
  nlohmann::json submit(const std::vector<Image>& frames);
  nlohmann::json match(std::int64_t id);
  int poll();

 private:
  Endpoint server_;
  std::chrono::milliseconds timeout_;
  std::optional<Connection> connection_;
};

struct SensorOptions {
  Endpoint server;
  // Either replay a stored session...
  std::optional<std::filesystem::path> dataset;
  std::string sample_id;  // session of this sample (first match); empty = first session
  // ...or synthesize one from a texture.
  TextureSpec texture;
  AcquisitionConfig acquisition;
  std::uint64_t seed = 0;
  int frames = 0;  // >0 truncates the session to this many frames
  std::chrono::milliseconds timeout = std::chrono::seconds(5);
};

// Submits one session and prints the match record. Returns the transmission id.
std::int64_t run_sensor_client(const SensorOptions& options, std::ostream& out);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::milliseconds now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
 public:
  std::chrono::milliseconds now() override;
  void sleep_for(std::chrono::milliseconds d) override { std::this_thread::sleep_for(d); }
};

// Time advances only through sleep_for.
class SimulatedClock final : public Clock {
 public:
  std::chrono::milliseconds now() override { return now_; }
  void sleep_for(std::chrono::milliseconds d) override { now_ += d; }

 private:
  std::chrono::milliseconds now_{0};
};

// Byte link to the actuator firmware: one request frame, one reply line.
class SerialLink {
 public:
  virtual ~SerialLink() = default;
  virtual std::string transact(const std::string& frame) = 0;
};

// In-process firmware emulation.
class EmulatedMotor final : public SerialLink {
 public:
  explicit EmulatedMotor(RollerConfig cfg, MotorState initial = {});
  std::string transact(const std::string& frame) override;

  const MotorState& state() const { return state_; }
  const std::vector<std::string>& received() const { return received_; }

 private:
  RollerConfig cfg_;
  MotorState state_;
  std::vector<std::string> received_;
};

class TcpSerialLink final : public SerialLink {
 public:
  TcpSerialLink(const Endpoint& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(5));
  std::string transact(const std::string& frame) override;

 private:
  Connection connection_;
};

// Firmware emulator reachable over TCP, speaking the raw serial frames.
class MotorEmulatorServer {
 public:
  MotorEmulatorServer(RollerConfig cfg, const Endpoint& bind);
  ~MotorEmulatorServer();
  std::uint16_t port() const { return listener_.port(); }
  MotorState state() const;
  void stop();

 private:
  RollerConfig cfg_;
  Listener listener_;
  mutable std::mutex mutex_;
  MotorState state_;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

class ActuatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActuatorStats {
  int polls = 0;
  int poll_failures = 0;
  int commands = 0;
  double max_rotation_deg = 0.0;
};

// Control loop: poll the target slot, rotate the plate when it changes.
class ActuatorClient {
 public:
  using PollFn = std::function<int()>;

  ActuatorClient(PollFn poll, SerialLink& link, RollerConfig roller, MotorState initial = {},
                 std::ostream* log = nullptr);

  // One cycle. Returns true when a command was sent. Poll failures are counted
  // and leave the motor alone; an ERR reply throws ActuatorError.
  bool step();
  // Runs `cycles` cycles (or until stop is set), sleeping `interval` between them.
  void run(Clock& clock, std::chrono::milliseconds interval, int cycles, const std::atomic<bool>* stop = nullptr);

  const MotorState& motor() const { return motor_; }
  int slot() const { return current_slot(motor_, roller_); }
  const ActuatorStats& stats() const { return stats_; }

 private:
  PollFn poll_;
  SerialLink& link_;
  RollerConfig roller_;
  MotorState motor_;
  std::ostream* log_;
  ActuatorStats stats_;
};

}  // namespace telextiles
