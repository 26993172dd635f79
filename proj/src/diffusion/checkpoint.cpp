#include "pulsediff/diffusion/checkpoint.hpp"

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"

namespace pulsediff::diffusion {

namespace {

constexpr std::string_view kMagic = "PDM1";

void put_vector(io::ByteWriter& w, const Eigen::VectorXd& v, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) w.put_f32(i < v.size() ? static_cast<float>(v[i]) : 0.0f);
}

Eigen::VectorXd get_vector(io::ByteReader& r, std::uint64_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = r.get_f32();
  return v;
}

}  // namespace

nlohmann::json config_to_json(const DenoiserConfig& cfg) {
  return {{"residual_blocks", cfg.residual_blocks}, {"channels", cfg.channels},
          {"kernel", cfg.kernel},                   {"dilation_cycle", cfg.dilation_cycle},
          {"step_embed_dim", cfg.step_embed_dim},   {"prior_channels", cfg.prior_channels},
          {"prior_mode", std::string(to_string(cfg.prior_mode))}};
}

DenoiserConfig config_from_json(const nlohmann::json& j) {
  DenoiserConfig cfg;
  cfg.residual_blocks = j.at("residual_blocks").get<std::size_t>();
  cfg.channels = j.at("channels").get<std::size_t>();
  cfg.kernel = j.at("kernel").get<std::size_t>();
  cfg.dilation_cycle = j.at("dilation_cycle").get<std::size_t>();
  cfg.step_embed_dim = j.at("step_embed_dim").get<std::size_t>();
  cfg.prior_channels = j.at("prior_channels").get<std::size_t>();
  cfg.prior_mode = parse_prior_mode(j.at("prior_mode").get<std::string>());
  cfg.validate();
  return cfg;
}

std::string checkpoint_to_binary(const Checkpoint& ckpt) {
  const nlohmann::json header = {
      {"format_version", 1},
      {"denoiser", config_to_json(ckpt.params.config)},
      {"schedule",
       {{"kind", std::string(to_string(ckpt.schedule.kind))},
        {"steps", ckpt.schedule.steps},
        {"beta_start", ckpt.schedule.beta_start},
        {"beta_end", ckpt.schedule.beta_end}}},
      {"adam_step", ckpt.adam.step},
      {"metadata", ckpt.metadata},
  };
  const std::string text = header.dump();
  const auto n = ckpt.params.theta.size();
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(static_cast<std::uint32_t>(text.size()));
  w.put_bytes(text);
  w.put_u64(static_cast<std::uint64_t>(n));
  put_vector(w, ckpt.params.theta, n);
  put_vector(w, ckpt.adam.m, n);
  put_vector(w, ckpt.adam.v, n);
  return w.bytes();
}

Checkpoint checkpoint_from_binary(std::string_view bytes) {
  io::ByteReader r{std::string(bytes)};
  if (r.get_bytes(4) != kMagic) throw Error(Errc::parse, "bad checkpoint magic");
  const std::uint32_t len = r.get_u32();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.get_bytes(len));
    Checkpoint ckpt;
    ckpt.params.config = config_from_json(header.at("denoiser"));
    const auto& s = header.at("schedule");
    ckpt.schedule = make_schedule(parse_schedule_kind(s.at("kind").get<std::string>()), s.at("steps").get<std::size_t>(),
                                  s.at("beta_start").get<double>(), s.at("beta_end").get<double>());
    ckpt.adam.step = header.at("adam_step").get<std::uint64_t>();
    ckpt.metadata = header.value("metadata", nlohmann::json::object());
    const std::uint64_t n = r.get_u64();
    if (n != parameter_count(ckpt.params.config)) throw Error(Errc::parse, "checkpoint parameter count mismatch");
    ckpt.params.theta = get_vector(r, n);
    ckpt.adam.m = get_vector(r, n);
    ckpt.adam.v = get_vector(r, n);
    if (r.remaining() != 0) throw Error(Errc::parse, "trailing bytes after checkpoint payload");
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  io::write_file_atomic(path, checkpoint_to_binary(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_binary(io::read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace pulsediff::diffusion
