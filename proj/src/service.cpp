#include "telextiles/service.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "telextiles/augmentation.hpp"
#include "telextiles/errors.hpp"

namespace telextiles {

const char* to_string(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::BadRequest: return "bad_request";
    case ServiceError::Code::NotFound: return "not_found";
    case ServiceError::Code::Unavailable: return "unavailable";
  }
  return "unknown";
}

std::string TransmissionRecord::to_json() const {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& n : ranking) ranked.push_back({{"id", n.sample_id}, {"distance", n.distance}});
  nlohmann::json doc = {{"type", "RECORD"},
                        {"id", id},
                        {"frames", frame_count},
                        {"latent_centroid", latent_centroid},
                        {"nearest_id", nearest},
                        {"slot", slot},
                        {"ranking", ranked},
                        {"nearest_overall", {{"id", nearest_overall.sample_id}, {"distance", nearest_overall.distance}}},
                        {"timestamp_ms", timestamp_ms}};
  return doc.dump();
}

struct MatchService::Model {
  Encoder encoder;
  AugmentConfig preprocess;
  LatentIndex index;
  int frame_height;
  int frame_width;
};

MatchService::MatchService(RollerConfig roller, ClockFn clock) : roller_(std::move(roller)), clock_(std::move(clock)) {
  roller_.validate();
  if (!clock_)
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
}

void MatchService::load(const Checkpoint& checkpoint, LatentIndex index, int frame_height, int frame_width) {
  for (const auto& id : roller_.slot_samples) (void)index.centroid(id);
  if (index.dim() != checkpoint.encoder.embedding_dim)
    throw ValidationError("index dimension does not match the encoder");
  auto model = std::make_shared<const Model>(Model{Encoder(checkpoint.encoder, checkpoint.params),
                                                   checkpoint.inference_config(), std::move(index), frame_height,
                                                   frame_width});
  std::unique_lock lock(mutex_);
  model_ = std::move(model);
}

bool MatchService::ready() const {
  std::shared_lock lock(mutex_);
  return model_ != nullptr;
}

SubmitResult MatchService::submit(const std::vector<Image>& frames) {
  std::shared_ptr<const Model> model;
  {
    std::shared_lock lock(mutex_);
    model = model_;
  }
  if (!model) throw ServiceError(ServiceError::Code::Unavailable, "no checkpoint loaded");
  if (frames.empty()) throw ServiceError(ServiceError::Code::BadRequest, "submission has no frames");
  for (const auto& f : frames)
    if (f.height != model->frame_height || f.width != model->frame_width)
      throw ServiceError(ServiceError::Code::BadRequest,
                         "frames must be " + std::to_string(model->frame_height) + "x" +
                             std::to_string(model->frame_width));

  std::vector<std::vector<float>> embeddings;
  embeddings.reserve(frames.size());
  for (const auto& f : frames) embeddings.push_back(model->encoder.embed(prepare_for_inference(f, model->preprocess)));

  TransmissionRecord record;
  record.frame_count = static_cast<int>(frames.size());
  record.latent_centroid = mean_vector(embeddings);
  record.ranking = model->index.rank_among(record.latent_centroid, roller_.slot_samples);
  record.nearest = record.ranking.front().sample_id;
  record.slot = roller_.slot_of(record.nearest);
  record.nearest_overall = model->index.nearest_sample(record.latent_centroid);

  std::lock_guard serial(submit_mutex_);
  std::unique_lock lock(mutex_);
  record.id = static_cast<std::int64_t>(records_.size()) + 1;
  record.timestamp_ms = clock_();
  records_.push_back(record.to_json());
  target_slot_ = record.slot;
  return {record.id, record.nearest, record.slot};
}

std::string MatchService::match(std::int64_t id) const {
  std::shared_lock lock(mutex_);
  if (id < 1 || id > static_cast<std::int64_t>(records_.size()))
    throw ServiceError(ServiceError::Code::NotFound, "no transmission with id " + std::to_string(id));
  return records_[static_cast<std::size_t>(id - 1)];
}

int MatchService::poll() const {
  std::shared_lock lock(mutex_);
  return target_slot_;
}

namespace {

std::vector<Image> decode_frames(const nlohmann::json& req) {
  using Code = ServiceError::Code;
  const int h = req.at("h").get<int>();
  const int w = req.at("w").get<int>();
  const int n = req.at("n").get<int>();
  if (h < 1 || w < 1 || n < 0) throw ServiceError(Code::BadRequest, "bad frame shape");
  std::string bytes;
  try {
    bytes = base64_decode(req.at("data_b64").get<std::string>());
  } catch (const ValidationError& e) {
    throw ServiceError(Code::BadRequest, e.what());
  }
  const std::size_t per_frame = static_cast<std::size_t>(h) * w * Image::kChannels;
  if (bytes.size() != per_frame * n * sizeof(float))
    throw ServiceError(Code::BadRequest, "payload holds " + std::to_string(bytes.size()) + " bytes, shape implies " +
                                             std::to_string(per_frame * n * sizeof(float)));
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  std::vector<Image> frames;
  frames.reserve(n);
  for (int i = 0; i < n; ++i) {
    Image img(h, w);
    std::memcpy(img.data.data(), bytes.data() + i * per_frame * sizeof(float), per_frame * sizeof(float));
    for (float v : img.data)
      if (!(v >= 0.0f && v <= 1.0f)) throw ServiceError(Code::BadRequest, "pixel outside [0,1]");
    frames.push_back(std::move(img));
  }
  return frames;
}

std::string error_response(ServiceError::Code code, const std::string& message) {
  return nlohmann::json{{"type", "ERROR"}, {"code", to_string(code)}, {"message", message}}.dump();
}

}  // namespace

std::string MatchService::handle(std::string_view request) {
  using Code = ServiceError::Code;
  try {
    const auto req = nlohmann::json::parse(request);
    const auto type = req.at("type").get<std::string>();
    if (type == "SUBMIT") {
      const auto r = submit(decode_frames(req));
      return nlohmann::json{{"type", "SUBMITTED"}, {"id", r.id}, {"nearest", r.nearest}, {"slot", r.slot}}.dump();
    }
    if (type == "MATCH") return match(req.at("id").get<std::int64_t>());
    if (type == "POLL") return nlohmann::json{{"type", "TARGET"}, {"slot", poll()}}.dump();
    return error_response(Code::BadRequest, "unknown request type " + type);
  } catch (const ServiceError& e) {
    return error_response(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(Code::BadRequest, std::string("malformed request: ") + e.what());
  } catch (const ValidationError& e) {
    return error_response(Code::BadRequest, e.what());
  }
}

std::string make_submit_request(const std::vector<Image>& frames) {
  if (frames.empty()) return nlohmann::json{{"type", "SUBMIT"}, {"h", 0}, {"w", 0}, {"n", 0}, {"data_b64", ""}}.dump();
  const int h = frames.front().height, w = frames.front().width;
  std::string bytes;
  bytes.reserve(frames.size() * frames.front().data.size() * sizeof(float));
  for (const auto& f : frames) {
    if (f.height != h || f.width != w) throw ValidationError("frames in one submission must share dimensions");
    bytes.append(reinterpret_cast<const char*>(f.data.data()), f.data.size() * sizeof(float));
  }
  return nlohmann::json{{"type", "SUBMIT"},
                        {"h", h},
                        {"w", w},
                        {"n", frames.size()},
                        {"data_b64", base64_encode(bytes)}}
      .dump();
}

std::string make_match_request(std::int64_t id) { return nlohmann::json{{"type", "MATCH"}, {"id", id}}.dump(); }

std::string make_poll_request() { return R"({"type":"POLL"})"; }

ServiceServer::ServiceServer(MatchService& service, const Endpoint& bind) : service_(service), listener_(bind) {
  acceptor_ = std::thread([this] { accept_loop(); });
}

ServiceServer::~ServiceServer() { stop(); }

void ServiceServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mutex_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void ServiceServer::accept_loop() {
  while (!stopping_) {
    Socket s = listener_.accept(std::chrono::milliseconds(50));
    if (!s.valid()) continue;
    std::lock_guard lock(workers_mutex_);
    if (stopping_) break;
    open_fds_.push_back(s.fd());
    workers_.emplace_back([this, sock = std::move(s)]() mutable { serve(std::move(sock)); });
  }
}

void ServiceServer::serve(Socket socket) {
  const int fd = socket.fd();
  {
    Connection conn(std::move(socket), std::chrono::hours(24));
    try {
      while (auto request = conn.receive_message()) conn.send_message(service_.handle(*request));
    } catch (const TransportError&) {
      // peer went away or sent garbage framing; drop the connection
    }
    std::lock_guard lock(workers_mutex_);
    open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  }
}

}  // namespace telextiles
