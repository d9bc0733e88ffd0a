#pragma once

// nlohmann::json conversions for configuration and manifest types.

#include <nlohmann/json.hpp>

#include "telextiles/augmentation.hpp"
#include "telextiles/network.hpp"
#include "telextiles/roller.hpp"
#include "telextiles/tactile_data.hpp"
#include "telextiles/trainer.hpp"

namespace telextiles {

void to_json(nlohmann::json& j, const TextureSpec& v);
void from_json(const nlohmann::json& j, TextureSpec& v);
void to_json(nlohmann::json& j, const AcquisitionConfig& v);
void from_json(const nlohmann::json& j, AcquisitionConfig& v);
void to_json(nlohmann::json& j, const SampleEntry& v);
void from_json(const nlohmann::json& j, SampleEntry& v);
void to_json(nlohmann::json& j, const SessionEntry& v);
void from_json(const nlohmann::json& j, SessionEntry& v);
void to_json(nlohmann::json& j, const DatasetManifest& v);
void from_json(const nlohmann::json& j, DatasetManifest& v);
void to_json(nlohmann::json& j, const AugmentConfig& v);
void from_json(const nlohmann::json& j, AugmentConfig& v);
void to_json(nlohmann::json& j, const ConvStage& v);
void from_json(const nlohmann::json& j, ConvStage& v);
void to_json(nlohmann::json& j, const EncoderConfig& v);
void from_json(const nlohmann::json& j, EncoderConfig& v);
void to_json(nlohmann::json& j, const TrainConfig& v);
void from_json(const nlohmann::json& j, TrainConfig& v);
void to_json(nlohmann::json& j, const RollerConfig& v);
void from_json(const nlohmann::json& j, RollerConfig& v);

}  // namespace telextiles
