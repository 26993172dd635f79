#include "run_config.hpp"

#include "pulsediff/binary_io.hpp"

namespace pulsediff::cli {

using nlohmann::json;

json default_config() {
  return json{
      {"seed", 0},
      {"synth",
       {{"count", 20},
        {"duration_s", 10.0},
        {"sample_rate_hz", 100.0},
        {"mean_interval_s", 0.8},
        {"interval_jitter_frac", 0.05},
        {"amplitude_jitter_frac", 0.05},
        {"noise_std", 0.05},
        {"morphology", "gaussian_qrs"},
        {"width_scale", 1.0}}},
      {"missingness", {{"kind", "transient"}, {"percentage", 0.3}, {"packet_len_samples", 5}}},
      {"template", {{"external_count", 10}}},
      {"prior", {{"loc_shift_M", 2}, {"amp_shift_A", 0.01}, {"k", 16}, {"threshold_r", 1.0}}},
      {"model",
       {{"residual_blocks", 4},
        {"channels", 32},
        {"kernel", 3},
        {"dilation_cycle", 4},
        {"step_embed_dim", 64},
        {"prior_mode", "input"}}},
      {"schedule", {{"preset", "csdi"}}},
      {"train",
       {{"epochs", 50},
        {"batch_size", 16},
        {"learning_rate", 1e-3},
        {"lr_decay", json::array({json::array({0.75, 0.1}), json::array({0.9, 0.01})})},
        {"target_only_loss", true}}},
      {"impute", {{"n_samples", 10}, {"quantiles", json::array({0.05, 0.95})}}},
      {"eval", {{"label", "PulseDiff"}}},
      {"sweep",
       {{"kinds", json::array({"transient", "extended"})},
        {"percentages", json::array({0.1, 0.2, 0.3, 0.4, 0.5})},
        {"baselines", json::array({"Template", "Linear", "ZeroFill"})},
        {"svg", false}}},
      {"ablate", {{"eval_fraction", 0.2}}},
  };
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

std::string type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

}  // namespace

void merge_checked(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("expected an object" + (prefix.empty() ? "" : " at '" + prefix + "'"));
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    auto found = base.find(it.key());
    if (found == base.end()) throw ConfigError("unknown key '" + key + "'");
    if (found->is_object()) {
      merge_checked(*found, *it, key);
      continue;
    }
    if (!same_kind(*found, *it))
      throw ConfigError("key '" + key + "' expects a " + type_name(*found) + ", got " + type_name(*it));
    // Keep integer-valued fields integral so later get<int>() calls are exact.
    if (found->is_number_integer() && it->is_number_float()) {
      const double v = it->get<double>();
      if (v != static_cast<double>(static_cast<long long>(v)))
        throw ConfigError("key '" + key + "' expects an integer");
      *found = static_cast<long long>(v);
    } else {
      *found = *it;
    }
  }
}

json load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  json cfg = default_config();
  if (!file.empty()) {
    json patch;
    try {
      patch = json::parse(io::read_file(file));
    } catch (const json::parse_error& e) {
      throw ConfigError(file.string() + ": " + e.what());
    }
    merge_checked(cfg, patch);
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not key=value");
    const std::string path = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json patch = value;
    std::string rest = path;
    std::vector<std::string> parts;
    for (std::size_t start = 0;;) {
      const auto dot = rest.find('.', start);
      parts.push_back(rest.substr(start, dot - start));
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    for (auto p = parts.rbegin(); p != parts.rend(); ++p) {
      if (p->empty()) throw ConfigError("override '" + ov + "' has an empty key segment");
      patch = json{{*p, patch}};
    }
    merge_checked(cfg, patch);
  }
  return cfg;
}

}  // namespace pulsediff::cli
