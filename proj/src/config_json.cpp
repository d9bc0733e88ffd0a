#include "telextiles/json_io.hpp"

namespace telextiles {
namespace {

// Missing keys keep the default already held by `field`.
template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) it->get_to(field);
}

}  // namespace

void to_json(nlohmann::json& j, const TextureSpec& v) {
  j = {{"weave_period_u", v.weave_period_u}, {"weave_period_v", v.weave_period_v},
       {"yarn_thickness", v.yarn_thickness}, {"fuzz_amplitude", v.fuzz_amplitude},
       {"stiffness_relief", v.stiffness_relief}, {"rng_seed", v.rng_seed}};
}
void from_json(const nlohmann::json& j, TextureSpec& v) {
  read(j, "weave_period_u", v.weave_period_u);
  read(j, "weave_period_v", v.weave_period_v);
  read(j, "yarn_thickness", v.yarn_thickness);
  read(j, "fuzz_amplitude", v.fuzz_amplitude);
  read(j, "stiffness_relief", v.stiffness_relief);
  read(j, "rng_seed", v.rng_seed);
}

void to_json(nlohmann::json& j, const AcquisitionConfig& v) {
  j = {{"jig", v.jig},
       {"frames_per_sample", v.frames_per_sample},
       {"frame_rate", v.frame_rate},
       {"duration", v.duration},
       {"pressure_jitter", v.pressure_jitter},
       {"tilt_jitter", v.tilt_jitter},
       {"position_jitter", v.position_jitter},
       {"rotation_jitter", v.rotation_jitter},
       {"frame_height", v.frame_height},
       {"frame_width", v.frame_width}};
}
void from_json(const nlohmann::json& j, AcquisitionConfig& v) {
  // The regime picks the noise defaults; explicit keys override them.
  if (auto it = j.find("jig"); it != j.end())
    v = it->get<bool>() ? AcquisitionConfig::with_jig() : AcquisitionConfig::without_jig();
  read(j, "frames_per_sample", v.frames_per_sample);
  read(j, "frame_rate", v.frame_rate);
  read(j, "duration", v.duration);
  read(j, "pressure_jitter", v.pressure_jitter);
  read(j, "tilt_jitter", v.tilt_jitter);
  read(j, "position_jitter", v.position_jitter);
  read(j, "rotation_jitter", v.rotation_jitter);
  read(j, "frame_height", v.frame_height);
  read(j, "frame_width", v.frame_width);
}

void to_json(nlohmann::json& j, const SampleEntry& v) {
  j = {{"id", v.id}, {"display_name", v.display_name}, {"texture", v.texture}};
}
void from_json(const nlohmann::json& j, SampleEntry& v) {
  j.at("id").get_to(v.id);
  read(j, "display_name", v.display_name);
  j.at("texture").get_to(v.texture);
}

void to_json(nlohmann::json& j, const SessionEntry& v) {
  j = {{"id", v.id},
       {"sample_id", v.sample_id},
       {"participant_id", v.participant_id},
       {"jig", v.jig},
       {"frame_count", v.frame_count}};
}
void from_json(const nlohmann::json& j, SessionEntry& v) {
  j.at("id").get_to(v.id);
  j.at("sample_id").get_to(v.sample_id);
  read(j, "participant_id", v.participant_id);
  read(j, "jig", v.jig);
  j.at("frame_count").get_to(v.frame_count);
}

void to_json(nlohmann::json& j, const DatasetManifest& v) {
  j = {{"frame_height", v.frame_height},
       {"frame_width", v.frame_width},
       {"samples", v.samples},
       {"sessions", v.sessions}};
}
void from_json(const nlohmann::json& j, DatasetManifest& v) {
  j.at("frame_height").get_to(v.frame_height);
  j.at("frame_width").get_to(v.frame_width);
  j.at("samples").get_to(v.samples);
  j.at("sessions").get_to(v.sessions);
}

void to_json(nlohmann::json& j, const AugmentConfig& v) {
  j = {{"crop_size", v.crop_size},
       {"vertical_flip_prob", v.vertical_flip_prob},
       {"rotation_prob", v.rotation_prob},
       {"rotation_range", {v.rotation_min_deg, v.rotation_max_deg}},
       {"normalize_mean", v.normalize_mean},
       {"normalize_std", v.normalize_std},
       {"hue_jitter", v.hue_jitter},
       {"gaussian_blur", v.gaussian_blur},
       {"grayscale", v.grayscale}};
}
void from_json(const nlohmann::json& j, AugmentConfig& v) {
  read(j, "crop_size", v.crop_size);
  read(j, "vertical_flip_prob", v.vertical_flip_prob);
  read(j, "rotation_prob", v.rotation_prob);
  if (auto it = j.find("rotation_range"); it != j.end()) {
    v.rotation_min_deg = it->at(0).get<double>();
    v.rotation_max_deg = it->at(1).get<double>();
  }
  read(j, "normalize_mean", v.normalize_mean);
  read(j, "normalize_std", v.normalize_std);
  read(j, "hue_jitter", v.hue_jitter);
  read(j, "gaussian_blur", v.gaussian_blur);
  read(j, "grayscale", v.grayscale);
}

void to_json(nlohmann::json& j, const ConvStage& v) {
  j = {{"out_channels", v.out_channels}, {"kernel", v.kernel}, {"stride", v.stride}};
}
void from_json(const nlohmann::json& j, ConvStage& v) {
  j.at("out_channels").get_to(v.out_channels);
  j.at("kernel").get_to(v.kernel);
  j.at("stride").get_to(v.stride);
}

void to_json(nlohmann::json& j, const EncoderConfig& v) {
  j = {{"input_height", v.input_height},
       {"input_width", v.input_width},
       {"input_channels", v.input_channels},
       {"stages", v.stages},
       {"embedding_dim", v.embedding_dim}};
}
void from_json(const nlohmann::json& j, EncoderConfig& v) {
  read(j, "input_height", v.input_height);
  read(j, "input_width", v.input_width);
  read(j, "input_channels", v.input_channels);
  read(j, "stages", v.stages);
  read(j, "embedding_dim", v.embedding_dim);
}

void to_json(nlohmann::json& j, const TrainConfig& v) {
  j = {{"learning_rate", v.learning_rate},
       {"momentum", v.momentum},
       {"weight_decay", v.weight_decay},
       {"epochs", v.epochs},
       {"batch_size", v.batch_size},
       {"queue_size", v.queue_size},
       {"key_momentum", v.key_momentum},
       {"temperature", v.temperature},
       {"seed", v.seed},
       {"knn_k", v.knn_k}};
}
void from_json(const nlohmann::json& j, TrainConfig& v) {
  read(j, "learning_rate", v.learning_rate);
  read(j, "momentum", v.momentum);
  read(j, "weight_decay", v.weight_decay);
  read(j, "epochs", v.epochs);
  read(j, "batch_size", v.batch_size);
  read(j, "queue_size", v.queue_size);
  read(j, "key_momentum", v.key_momentum);
  read(j, "temperature", v.temperature);
  read(j, "seed", v.seed);
  read(j, "knn_k", v.knn_k);
}

void to_json(nlohmann::json& j, const RollerConfig& v) {
  j = {{"slot_samples", v.slot_samples},
       {"full_step_angle", v.full_step_angle},
       {"microstep_divisor", v.microstep_divisor}};
}
void from_json(const nlohmann::json& j, RollerConfig& v) {
  read(j, "slot_samples", v.slot_samples);
  read(j, "full_step_angle", v.full_step_angle);
  read(j, "microstep_divisor", v.microstep_divisor);
}

}  // namespace telextiles
