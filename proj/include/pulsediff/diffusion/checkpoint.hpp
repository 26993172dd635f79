#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pulsediff/diffusion/denoiser.hpp"
#include "pulsediff/diffusion/schedule.hpp"
#include "pulsediff/diffusion/train.hpp"

namespace pulsediff::diffusion {

/// Model state plus free-form metadata (the CLI records the prior settings
/// the model was trained with).
struct Checkpoint {
  DenoiserParams params;
  NoiseSchedule schedule;
  AdamState adam;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json config_to_json(const DenoiserConfig& cfg);
DenoiserConfig config_from_json(const nlohmann::json& j);

/// `PDM1`, u32 length + canonical JSON header, u64 parameter count, then f32
/// theta and the f32 Adam first and second moments.
std::string checkpoint_to_binary(const Checkpoint& ckpt);
Checkpoint checkpoint_from_binary(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pulsediff::diffusion
