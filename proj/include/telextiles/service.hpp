#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "telextiles/checkpoint.hpp"
#include "telextiles/latent_index.hpp"
#include "telextiles/roller.hpp"
#include "telextiles/wire.hpp"

namespace telextiles {

struct TransmissionRecord {
  std::int64_t id = 0;
  int frame_count = 0;
  std::vector<float> latent_centroid;
  std::string nearest;                // closest roller sample
  std::vector<Neighbor> ranking;      // every roller sample, ascending distance
  int slot = 0;                       // slot carrying `nearest`
  Neighbor nearest_overall;           // closest sample in the whole index
  std::int64_t timestamp_ms = 0;

  std::string to_json() const;
};

struct SubmitResult {
  std::int64_t id = 0;
  std::string nearest;
  int slot = 0;
};

// Matching state behind the wire protocol. Submissions are serialized; polls and
// matches read concurrently.
class MatchService {
 public:
  using ClockFn = std::function<std::int64_t()>;  // milliseconds

  explicit MatchService(RollerConfig roller, ClockFn clock = {});

  // Installs the encoder and the index. Every roller sample must have a centroid.
  void load(const Checkpoint& checkpoint, LatentIndex index, int frame_height, int frame_width);
  bool ready() const;

  SubmitResult submit(const std::vector<Image>& frames);
  // Stored record JSON, identical on every call.
  std::string match(std::int64_t id) const;
  int poll() const;

  // Parses one request document and returns the response document.
  std::string handle(std::string_view request);

  const RollerConfig& roller() const { return roller_; }

 private:
  struct Model;

  RollerConfig roller_;
  ClockFn clock_;
  mutable std::shared_mutex mutex_;
  std::shared_ptr<const Model> model_;
  std::vector<std::string> records_;  // record JSON by id - 1
  int target_slot_ = 0;
  std::mutex submit_mutex_;
};

// Request builders shared by clients and tests.
std::string make_submit_request(const std::vector<Image>& frames);
std::string make_match_request(std::int64_t id);
std::string make_poll_request();

// TCP front end: one thread per connection, any number of requests per connection.
class ServiceServer {
 public:
  ServiceServer(MatchService& service, const Endpoint& bind);
  ~ServiceServer();
  ServiceServer(const ServiceServer&) = delete;
  ServiceServer& operator=(const ServiceServer&) = delete;

  std::uint16_t port() const { return listener_.port(); }
  void stop();

 private:
  void accept_loop();
  void serve(Socket socket);

  MatchService& service_;
  Listener listener_;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex workers_mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> open_fds_;  // live connections, shut down on stop()
};

}  // namespace telextiles
