#include "telextiles/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "telextiles/errors.hpp"
#include "telextiles/json_io.hpp"

namespace telextiles {
namespace {

constexpr char kMagic[4] = {'T', 'X', 'E', '1'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  template <typename T>
  T take(CheckpointError::Kind kind, const char* what) {
    if (!has(sizeof(T))) throw CheckpointError(kind, std::string("checkpoint truncated in ") + what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string take_bytes(std::size_t n, CheckpointError::Kind kind, const char* what) {
    if (!has(n)) throw CheckpointError(kind, std::string("checkpoint truncated in ") + what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

AugmentConfig Checkpoint::inference_config() const {
  AugmentConfig cfg;
  cfg.crop_size = crop_size;
  cfg.normalize_mean = normalize_mean;
  cfg.normalize_std = normalize_std;
  return cfg;
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  const EncoderLayout layout(checkpoint.encoder);
  if (checkpoint.params.size() != layout.parameter_count())
    throw CheckpointError(CheckpointError::Kind::ParamCount, "parameter count does not match the encoder config");
  nlohmann::json config = {{"encoder", checkpoint.encoder},
                           {"crop_size", checkpoint.crop_size},
                           {"normalize_mean", checkpoint.normalize_mean},
                           {"normalize_std", checkpoint.normalize_std},
                           {"meta",
                            {{"epoch", checkpoint.meta.epoch},
                             {"loss_history", checkpoint.meta.loss_history},
                             {"seed", checkpoint.meta.seed}}}};
  const std::string block = config.dump();
  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(block.size()));
  out += block;
  put_le<std::uint64_t>(out, checkpoint.params.size());
  for (float p : checkpoint.params) put_le<float>(out, p);
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  using Kind = CheckpointError::Kind;
  Reader in(bytes);
  const std::string magic = in.take_bytes(4, Kind::Format, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw CheckpointError(Kind::Format, "not a checkpoint (bad magic)");
  const auto version = in.take<std::uint32_t>(Kind::Format, "version");
  if (version != Checkpoint::kVersion)
    throw CheckpointError(Kind::Version, "unsupported checkpoint version " + std::to_string(version));
  const auto block_size = in.take<std::uint32_t>(Kind::Format, "config length");
  const std::string block = in.take_bytes(block_size, Kind::Format, "config block");

  Checkpoint ck;
  try {
    const auto config = nlohmann::json::parse(block);
    config.at("encoder").get_to(ck.encoder);
    config.at("crop_size").get_to(ck.crop_size);
    config.at("normalize_mean").get_to(ck.normalize_mean);
    config.at("normalize_std").get_to(ck.normalize_std);
    const auto& meta = config.at("meta");
    meta.at("epoch").get_to(ck.meta.epoch);
    meta.at("loss_history").get_to(ck.meta.loss_history);
    meta.at("seed").get_to(ck.meta.seed);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(Kind::Format, std::string("bad config block: ") + e.what());
  }

  const EncoderLayout layout(ck.encoder);
  const auto count = in.take<std::uint64_t>(Kind::ParamCount, "parameter count");
  if (count != layout.parameter_count())
    throw CheckpointError(Kind::ParamCount, "header declares " + std::to_string(count) + " parameters, config needs " +
                                                std::to_string(layout.parameter_count()));
  if (in.remaining() != count * sizeof(float))
    throw CheckpointError(Kind::ParamCount, "payload holds " + std::to_string(in.remaining() / sizeof(float)) +
                                                " parameters, expected " + std::to_string(count));
  ck.params.resize(count);
  for (auto& p : ck.params) p = in.take<float>(Kind::ParamCount, "parameters");
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

}  // namespace telextiles
