// Command-line front end: synth, mask, template, prior, train, impute, eval,
// sweep and ablate over a directory of rec_NNNN.* files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/core/missingness.hpp"
#include "pulsediff/core/recording_io.hpp"
#include "pulsediff/core/synth.hpp"
#include "pulsediff/diffusion/checkpoint.hpp"
#include "pulsediff/diffusion/sampler.hpp"
#include "pulsediff/diffusion/train.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/eval/imputers.hpp"
#include "pulsediff/eval/sweep.hpp"
#include "pulsediff/parallel.hpp"
#include "pulsediff/prior/extract.hpp"
#include "pulsediff/prior/pulse_prior.hpp"
#include "pulsediff/rng.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pulsediff;

namespace {

// ---- configuration views ----------------------------------------------------

core::SynthConfig synth_config(const json& c) {
  const auto& s = c.at("synth");
  core::SynthConfig cfg;
  cfg.duration_s = s.at("duration_s").get<double>();
  cfg.sample_rate_hz = s.at("sample_rate_hz").get<double>();
  cfg.mean_interval_s = s.at("mean_interval_s").get<double>();
  cfg.interval_jitter_frac = s.at("interval_jitter_frac").get<double>();
  cfg.amplitude_jitter_frac = s.at("amplitude_jitter_frac").get<double>();
  cfg.noise_std = s.at("noise_std").get<double>();
  cfg.morphology = core::parse_morphology(s.at("morphology").get<std::string>());
  cfg.width_scale = s.at("width_scale").get<double>();
  cfg.validate();
  return cfg;
}

core::MissingnessSpec missingness_spec(const json& c) {
  const auto& m = c.at("missingness");
  core::MissingnessSpec spec;
  spec.kind = core::parse_missing_kind(m.at("kind").get<std::string>());
  spec.percentage = m.at("percentage").get<double>();
  spec.packet_len_samples = m.at("packet_len_samples").get<std::size_t>();
  spec.validate();
  return spec;
}

prior::PriorConfig prior_config(const json& p) {
  prior::PriorConfig cfg;
  cfg.loc_shift_M = p.at("loc_shift_M").get<int>();
  cfg.amp_shift_A = p.at("amp_shift_A").get<double>();
  cfg.k = p.at("k").get<std::size_t>();
  cfg.threshold_r = p.at("threshold_r").get<double>();
  cfg.validate();
  return cfg;
}

json prior_config_json(const prior::PriorConfig& cfg) {
  return json{{"loc_shift_M", cfg.loc_shift_M},
              {"amp_shift_A", cfg.amp_shift_A},
              {"k", cfg.k},
              {"threshold_r", cfg.threshold_r}};
}

diffusion::DenoiserConfig model_config(const json& c) {
  const auto& m = c.at("model");
  diffusion::DenoiserConfig cfg;
  cfg.residual_blocks = m.at("residual_blocks").get<std::size_t>();
  cfg.channels = m.at("channels").get<std::size_t>();
  cfg.kernel = m.at("kernel").get<std::size_t>();
  cfg.dilation_cycle = m.at("dilation_cycle").get<std::size_t>();
  cfg.step_embed_dim = m.at("step_embed_dim").get<std::size_t>();
  cfg.prior_mode = diffusion::parse_prior_mode(m.at("prior_mode").get<std::string>());
  cfg.prior_channels = c.at("prior").at("k").get<std::size_t>();
  cfg.validate();
  return cfg;
}

diffusion::TrainConfig train_config(const json& c) {
  const auto& t = c.at("train");
  diffusion::TrainConfig cfg;
  cfg.epochs = t.at("epochs").get<std::size_t>();
  cfg.batch_size = t.at("batch_size").get<std::size_t>();
  cfg.learning_rate = t.at("learning_rate").get<double>();
  cfg.lr_decay.clear();
  for (const auto& d : t.at("lr_decay")) {
    if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
      throw cli::ConfigError("train.lr_decay entries must be [fraction, factor]");
    cfg.lr_decay.push_back({d[0].get<double>(), d[1].get<double>()});
  }
  cfg.target_only_loss = t.at("target_only_loss").get<bool>();
  cfg.missingness = missingness_spec(c);
  cfg.seed = derive_seed(c.at("seed").get<std::uint64_t>(), "cli.train");
  cfg.validate();
  return cfg;
}

std::vector<double> number_list(const json& j, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw cli::ConfigError("'" + key + "' must be a list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw cli::ConfigError("'" + key + "' must be a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

/// Checks every section so a bad value fails before any work starts.
void validate_config(const json& c) {
  (void)synth_config(c);
  (void)train_config(c);
  (void)prior_config(c.at("prior"));
  (void)model_config(c);
  (void)diffusion::schedule_preset(c.at("schedule").at("preset").get<std::string>());
  const auto& imp = c.at("impute");
  if (imp.at("n_samples").get<std::size_t>() == 0) throw cli::ConfigError("impute.n_samples must be at least 1");
  for (double q : number_list(imp.at("quantiles"), "impute.quantiles"))
    if (!(q >= 0.0 && q <= 1.0)) throw cli::ConfigError("impute.quantiles must lie in [0, 1]");
  const auto& sw = c.at("sweep");
  for (const auto& k : string_list(sw.at("kinds"), "sweep.kinds")) (void)core::parse_missing_kind(k);
  (void)number_list(sw.at("percentages"), "sweep.percentages");
  (void)string_list(sw.at("baselines"), "sweep.baselines");
}

// ---- dataset directory ------------------------------------------------------

std::string stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rec_%04zu", i);
  return buf;
}

fs::path file_for(const fs::path& dir, std::size_t i, std::string_view suffix) {
  return dir / (stem(i) + std::string(suffix));
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::invalid_argument, "not a directory: " + dir.string());
}

/// Indices of rec_NNNN.csv files, ascending.
std::vector<std::size_t> list_recordings(const fs::path& dir) {
  require_dir(dir);
  static const std::regex pattern(R"(rec_(\d{4})\.csv)");
  std::vector<std::size_t> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) ids.push_back(std::stoul(m[1].str()));
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw Error(Errc::invalid_argument, "no rec_NNNN.csv files in " + dir.string());
  return ids;
}

std::vector<core::Recording> load_all(const fs::path& dir, const std::vector<std::size_t>& ids,
                                      std::string_view suffix) {
  std::vector<std::optional<core::Recording>> slots(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) { slots[i] = core::load_recording(file_for(dir, ids[i], suffix)); });
  std::vector<core::Recording> out;
  out.reserve(ids.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

core::BeatSequence load_beats(const fs::path& path) { return core::beats_from_csv(io::read_file(path)); }

/// Ground-truth beats when every recording has a beats file, else empty.
std::vector<core::BeatSequence> load_truths(const fs::path& dir, const std::vector<std::size_t>& ids) {
  std::vector<core::BeatSequence> out;
  for (std::size_t id : ids) {
    const auto path = file_for(dir, id, ".beats.csv");
    if (!fs::exists(path)) return {};
    out.push_back(load_beats(path));
  }
  return out;
}

prior::PulseTemplate external_template(const fs::path& dir, const std::vector<core::Recording>& clean,
                                       const json& c) {
  const auto path = dir / "external.template.csv";
  if (fs::exists(path)) return prior::load_template(path);
  const auto n = std::min<std::size_t>(clean.size(), c.at("template").at("external_count").get<std::size_t>());
  if (n == 0) throw cli::ConfigError("template.external_count must be at least 1");
  return prior::build_external_template(std::span(clean).first(n));
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_file_atomic(path, text);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- commands ---------------------------------------------------------------

struct Common {
  std::string config;
  std::vector<std::string> sets;
  json cfg;
  std::uint64_t seed = 0;

  void load() {
    cfg = cli::load_run_config(config, sets);
    validate_config(cfg);
    seed = cfg.at("seed").get<std::uint64_t>();
  }
};

void command_synth(Common& common, const fs::path& out) {
  const auto cfg = synth_config(common.cfg);
  const auto count = common.cfg.at("synth").at("count").get<std::size_t>();
  if (count == 0) throw cli::ConfigError("synth.count must be at least 1");
  fs::create_directories(out);
  std::size_t beats = 0;
  std::vector<std::size_t> per(count);
  parallel_for(count, [&](std::size_t i) {
    auto [rec, truth] = core::synth_ecg(cfg, derive_seed(common.seed, "cli.synth", {i}));
    core::save_recording(rec, file_for(out, i, ".csv"));
    io::write_file_atomic(file_for(out, i, ".beats.csv"), core::beats_to_csv(truth));
    per[i] = truth.size();
  });
  for (auto b : per) beats += b;
  std::cout << "synth: " << count << " recordings, " << beats << " beats -> " << out.string() << "\n";
}

void command_mask(Common& common, const fs::path& dir) {
  const auto ids = list_recordings(dir);
  const auto base = missingness_spec(common.cfg);
  std::vector<std::size_t> missing(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const auto rec = core::load_recording(file_for(dir, ids[i], ".csv"));
    auto spec = base;
    spec.seed = derive_seed(common.seed, "cli.mask", {ids[i]});
    const auto masked = core::apply_missingness(rec, spec);
    missing[i] = masked.missing_count();
    core::save_recording(masked, file_for(dir, ids[i], ".masked.csv"));
  });
  std::size_t total = 0;
  for (auto m : missing) total += m;
  std::cout << "mask: " << ids.size() << " recordings, " << total << " samples removed ("
            << core::to_string(base.kind) << ", " << fmt(base.percentage) << ")\n";
}

void command_template(Common& common, const fs::path& dir) {
  const auto ids = list_recordings(dir);
  const auto clean = load_all(dir, ids, ".csv");
  const auto n_ext = common.cfg.at("template").at("external_count").get<std::size_t>();
  if (n_ext == 0) throw cli::ConfigError("template.external_count must be at least 1");
  const auto ext = prior::build_external_template(std::span(clean).first(std::min(n_ext, clean.size())));
  prior::save_template(ext, dir / "external.template.csv");

  std::vector<int> degraded(ids.size());
  std::vector<std::size_t> beats(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const auto masked = core::load_recording(file_for(dir, ids[i], ".masked.csv"));
    const auto st = prior::two_pass_template(masked, ext);
    prior::save_template(st.tmpl, file_for(dir, ids[i], ".template.csv"));
    io::write_file_atomic(file_for(dir, ids[i], ".detected.csv"), core::beats_to_csv(st.beats));
    degraded[i] = st.degraded;
    beats[i] = st.beats.size();
  });
  std::size_t n_deg = 0, n_beats = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    n_deg += degraded[i];
    n_beats += beats[i];
  }
  std::cout << "template: " << ids.size() << " subject templates, " << n_beats << " beats detected, " << n_deg
            << " degraded\n";
}

void command_prior(Common& common, const fs::path& dir) {
  const auto ids = list_recordings(dir);
  const auto cfg = prior_config(common.cfg.at("prior"));
  std::vector<int> used(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    const auto masked = core::load_recording(file_for(dir, ids[i], ".masked.csv"));
    const auto tmpl = prior::load_template(file_for(dir, ids[i], ".template.csv"));
    const auto beats = load_beats(file_for(dir, ids[i], ".detected.csv"));
    const auto p = prior::build_prior(tmpl, beats, masked.size(), cfg, derive_seed(common.seed, "cli.prior", {ids[i]}));
    prior::save_prior(p, file_for(dir, ids[i], ".prior.bin"));
    used[i] = p.used_imputed_beats;
  });
  std::size_t n_used = 0;
  for (int u : used) n_used += u;
  std::cout << "prior: " << ids.size() << " priors (K=" << cfg.k << ", M=" << cfg.loc_shift_M
            << ", A=" << fmt(cfg.amp_shift_A) << "), " << n_used << " with imputed beats\n";
}

diffusion::Checkpoint train_model(const std::vector<core::Recording>& data, const std::vector<prior::PulsePrior>& priors,
                                  const diffusion::DenoiserConfig& model, const diffusion::TrainConfig& tcfg,
                                  const json& c, const json& prior_meta, const fs::path& trace_path) {
  const auto preset = c.at("schedule").at("preset").get<std::string>();
  const auto sched = diffusion::schedule_preset(preset);
  auto result = diffusion::train(data, priors, model, tcfg, sched);
  if (!trace_path.empty()) write_text(trace_path, diffusion::loss_trace_to_csv(result.trace));
  if (result.diverged) throw Error(Errc::diverged, "training loss became non-finite");
  diffusion::Checkpoint ckpt{std::move(result.params), sched, std::move(result.adam), json::object()};
  ckpt.metadata["prior"] = prior_meta;
  ckpt.metadata["schedule_preset"] = preset;
  ckpt.metadata["recordings"] = data.size();
  return ckpt;
}

void command_train(Common& common, const fs::path& dir, const fs::path& out, const fs::path& trace) {
  const auto ids = list_recordings(dir);
  const auto model = model_config(common.cfg);
  const auto tcfg = train_config(common.cfg);
  const auto pcfg = prior_config(common.cfg.at("prior"));
  const auto data = load_all(dir, ids, ".masked.csv");
  std::vector<prior::PulsePrior> priors;
  if (model.prior_mode == diffusion::PriorMode::input) {
    priors.resize(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) { priors[i] = prior::load_prior(file_for(dir, ids[i], ".prior.bin")); });
  }
  const auto ckpt = train_model(data, priors, model, tcfg, common.cfg, prior_config_json(pcfg), trace);
  diffusion::save_checkpoint(ckpt, out);
  std::cout << "train: " << data.size() << " recordings, " << tcfg.epochs << " epochs, "
            << diffusion::parameter_count(model) << " parameters -> " << out.string() << "\n";
}

void command_impute(Common& common, const fs::path& dir, const fs::path& model_path) {
  const auto ids = list_recordings(dir);
  const auto ckpt = diffusion::load_checkpoint(model_path);
  const auto n_samples = common.cfg.at("impute").at("n_samples").get<std::size_t>();
  const auto quantiles = number_list(common.cfg.at("impute").at("quantiles"), "impute.quantiles");
  const bool wants_prior = ckpt.params.config.prior_mode == diffusion::PriorMode::input;
  std::size_t filled = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto masked = core::load_recording(file_for(dir, ids[i], ".masked.csv"));
    std::optional<prior::PulsePrior> p;
    if (wants_prior) p = prior::load_prior(file_for(dir, ids[i], ".prior.bin"));
    const auto r = diffusion::impute(masked, p ? &*p : nullptr, ckpt.params, ckpt.schedule, n_samples,
                                     derive_seed(common.seed, "cli.impute", {ids[i]}), quantiles);
    core::save_recording(masked.with_values(r.point_estimate), file_for(dir, ids[i], ".imputed.csv"));
    std::string bands = "index";
    for (double q : r.quantile_levels) bands += ",q" + io::format_double(q);
    bands += '\n';
    for (std::size_t j = 0; j < r.length; ++j) {
      bands += std::to_string(j);
      for (std::size_t b = 0; b < r.quantile_levels.size(); ++b)
        bands += "," + io::format_float(static_cast<float>(r.band(b)[j]));
      bands += '\n';
    }
    io::write_file_atomic(file_for(dir, ids[i], ".bands.csv"), bands);
    filled += masked.missing_count();
  }
  std::cout << "impute: " << ids.size() << " recordings, " << filled << " samples filled with " << n_samples
            << " draws each\n";
}

void command_eval(Common& common, const fs::path& dir, const fs::path& out) {
  const auto ids = list_recordings(dir);
  const auto spec = missingness_spec(common.cfg);
  const auto label = common.cfg.at("eval").at("label").get<std::string>();
  std::vector<eval::RecordingRow> rows(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) {
    rows[i].index = ids[i];
    try {
      const auto masked = core::load_recording(file_for(dir, ids[i], ".masked.csv"));
      const auto imputed = core::load_recording(file_for(dir, ids[i], ".imputed.csv"));
      const auto truth = load_beats(file_for(dir, ids[i], ".beats.csv"));
      const auto tmpl = prior::load_template(file_for(dir, ids[i], ".template.csv"));
      if (imputed.size() != masked.size()) throw Error(Errc::invalid_argument, "imputed length differs from recording");
      std::vector<double> values(imputed.values().begin(), imputed.values().end());
      rows[i] = eval::score_recording(ids[i], values, masked, truth, tmpl);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  const auto report = eval::aggregate(label, spec.kind, spec.percentage, std::move(rows));
  if (report.n_recordings == 0) throw Error(Errc::degenerate, "no recording could be scored: " + report.error);
  write_text(out, eval::reports_to_csv(std::span(&report, 1)));
  std::cout << "eval: " << report.model << " mse=" << fmt(report.mse) << " f1=" << fmt(report.f1) << " over "
            << report.n_recordings << " recordings -> " << out.string() << "\n";
}

std::unique_ptr<eval::Imputer> baseline(const std::string& name, double threshold_r) {
  if (name == "Template") return std::make_unique<eval::TemplateImputer>(threshold_r);
  if (name == "Linear") return std::make_unique<eval::LinearImputer>();
  if (name == "ZeroFill") return std::make_unique<eval::ZeroFillImputer>();
  throw cli::ConfigError("unknown baseline '" + name + "' (expected Template, Linear or ZeroFill)");
}

void write_reports(const fs::path& out, const std::vector<eval::EvalReport>& reports, bool svg) {
  fs::create_directories(out);
  io::write_file_atomic(out / "report.csv", eval::reports_to_csv(reports));
  std::vector<core::MissingKind> kinds;
  for (const auto& r : reports)
    if (std::find(kinds.begin(), kinds.end(), r.kind) == kinds.end()) kinds.push_back(r.kind);
  for (auto kind : kinds) {
    for (std::string_view metric : {"mse", "f1"}) {
      const std::string base = "plot_" + std::string(metric) + "_" + std::string(core::to_string(kind));
      io::write_file_atomic(out / (base + ".csv"), eval::plot_csv(reports, metric, kind));
      if (svg) io::write_file_atomic(out / (base + ".svg"), eval::plot_svg(reports, metric, kind));
    }
  }
}

void command_sweep(Common& common, const fs::path& dir, const fs::path& out, const std::vector<std::string>& models) {
  const auto ids = list_recordings(dir);
  const auto clean = load_all(dir, ids, ".csv");
  const auto truths = load_truths(dir, ids);
  const auto ext = external_template(dir, clean, common.cfg);
  const auto& sw = common.cfg.at("sweep");
  const auto n_samples = common.cfg.at("impute").at("n_samples").get<std::size_t>();
  const auto pcfg = prior_config(common.cfg.at("prior"));

  std::vector<std::unique_ptr<eval::Imputer>> owned;
  for (const auto& path : models) {
    auto ckpt = diffusion::load_checkpoint(path);
    auto model_prior = ckpt.metadata.contains("prior") ? prior_config(ckpt.metadata.at("prior")) : pcfg;
    const std::string label = ckpt.metadata.value("label", fs::path(path).stem().string());
    owned.push_back(std::make_unique<eval::DiffusionImputer>(label, std::move(ckpt.params), std::move(ckpt.schedule),
                                                             model_prior, n_samples));
  }
  for (const auto& name : string_list(sw.at("baselines"), "sweep.baselines"))
    owned.push_back(baseline(name, pcfg.threshold_r));
  if (owned.empty()) throw cli::ConfigError("sweep has no models: pass --model or list sweep.baselines");

  eval::SweepConfig scfg;
  scfg.kinds.clear();
  for (const auto& k : string_list(sw.at("kinds"), "sweep.kinds")) scfg.kinds.push_back(core::parse_missing_kind(k));
  scfg.percentages = number_list(sw.at("percentages"), "sweep.percentages");
  scfg.packet_len_samples = common.cfg.at("missingness").at("packet_len_samples").get<std::size_t>();
  scfg.seed = derive_seed(common.seed, "cli.sweep");

  std::vector<const eval::Imputer*> ptrs;
  for (const auto& m : owned) ptrs.push_back(m.get());
  const auto reports = eval::run_sweep(ptrs, clean, truths, ext, scfg);
  write_reports(out, reports, sw.at("svg").get<bool>());
  std::size_t failed = 0;
  for (const auto& r : reports) failed += r.n_recordings == 0;
  std::cout << "sweep: " << reports.size() << " report rows (" << ptrs.size() << " models), " << failed
            << " failed -> " << out.string() << "\n";
}

void command_ablate(Common& common, const fs::path& dir, const fs::path& out) {
  const auto ids = list_recordings(dir);
  const auto clean = load_all(dir, ids, ".csv");
  const auto truths = load_truths(dir, ids);
  const auto spec = missingness_spec(common.cfg);
  const auto base_prior = prior_config(common.cfg.at("prior"));
  const auto model_base = model_config(common.cfg);
  const auto tcfg = train_config(common.cfg);
  const auto n_samples = common.cfg.at("impute").at("n_samples").get<std::size_t>();

  const double frac = common.cfg.at("ablate").at("eval_fraction").get<double>();
  if (!(frac > 0.0 && frac < 1.0)) throw cli::ConfigError("ablate.eval_fraction must lie in (0, 1)");
  const auto n = clean.size();
  if (n < 2) throw Error(Errc::invalid_argument, "ablate needs at least 2 recordings");
  const auto n_eval = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(frac * n)), 1, n - 1);
  const auto n_train = n - n_eval;

  const auto ext = external_template(dir, std::vector<core::Recording>(clean.begin(), clean.begin() + n_train),
                                     common.cfg);
  std::vector<std::optional<core::Recording>> masked_slots(n_train);
  std::vector<std::optional<prior::SubjectTemplate>> subjects(n_train);
  parallel_for(n_train, [&](std::size_t i) {
    auto s = spec;
    s.seed = derive_seed(common.seed, "cli.ablate.mask", {i});
    masked_slots[i] = core::apply_missingness(clean[i], s);
    subjects[i] = prior::two_pass_template(*masked_slots[i], ext);
  });
  std::vector<core::Recording> train_set;
  for (auto& m : masked_slots) train_set.push_back(std::move(*m));

  struct Variant {
    std::string label;
    bool use_prior;
    prior::PriorConfig prior;
  };
  auto fixed = base_prior;
  fixed.k = 1;
  fixed.loc_shift_M = 0;
  fixed.amp_shift_A = 0.0;
  auto no_score = [](prior::PriorConfig p) {
    p.threshold_r = 0.0;
    return p;
  };
  const std::vector<Variant> variants{
      {"baseline", false, base_prior},
      {"fixed-prior", true, no_score(fixed)},
      {"fixed-prior+score", true, fixed},
      {"augmented", true, no_score(base_prior)},
      {"augmented+score", true, base_prior},
  };

  std::vector<std::unique_ptr<eval::Imputer>> owned;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    const auto& var = variants[v];
    auto model = model_base;
    model.prior_mode = var.use_prior ? diffusion::PriorMode::input : diffusion::PriorMode::none;
    model.prior_channels = var.prior.k;
    std::vector<prior::PulsePrior> priors;
    if (var.use_prior) {
      priors.resize(n_train);
      parallel_for(n_train, [&](std::size_t i) {
        priors[i] = prior::build_prior(subjects[i]->tmpl, subjects[i]->beats, train_set[i].size(), var.prior,
                                       derive_seed(common.seed, "cli.ablate.prior", {i}));
      });
    }
    auto ckpt = train_model(train_set, priors, model, tcfg, common.cfg, prior_config_json(var.prior), {});
    owned.push_back(std::make_unique<eval::DiffusionImputer>(var.label, std::move(ckpt.params),
                                                             std::move(ckpt.schedule), var.prior, n_samples));
  }

  eval::SweepConfig scfg;
  scfg.kinds = {spec.kind};
  scfg.percentages = {spec.percentage};
  scfg.packet_len_samples = spec.packet_len_samples;
  scfg.seed = derive_seed(common.seed, "cli.ablate.eval");
  std::vector<const eval::Imputer*> ptrs;
  for (const auto& m : owned) ptrs.push_back(m.get());
  const std::span<const core::BeatSequence> eval_truths =
      truths.empty() ? std::span<const core::BeatSequence>{} : std::span(truths).subspan(n_train);
  const auto reports = eval::run_sweep(ptrs, std::span(clean).subspan(n_train), eval_truths, ext, scfg);
  fs::create_directories(out);
  io::write_file_atomic(out / "report.csv", eval::reports_to_csv(reports));
  std::cout << "ablate: " << reports.size() << " variants trained on " << n_train << ", evaluated on " << n_eval
            << " recordings -> " << (out / "report.csv").string() << "\n";
}

// ---- entry point ------------------------------------------------------------

int fail(std::string_view code, std::string_view msg, int status) {
  std::string line(msg);
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::cerr << "ERROR " << code << ": " << line << "\n";
  return status;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--config", common.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--set", common.sets, "Override a configuration key (key.path=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-based imputation of missing segments in pulse recordings"};
  app.name("pulsediff");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  Common common;
  std::string data, out, model, trace;
  std::vector<std::string> models;

  auto* synth = app.add_subcommand("synth", "Generate synthetic recordings and their beat lists");
  add_common(synth, common);
  synth->add_option("--out", out, "Output directory")->required();

  auto* mask = app.add_subcommand("mask", "Apply simulated missingness to every recording");
  add_common(mask, common);
  mask->add_option("--data", data, "Dataset directory")->required();

  auto* tmpl = app.add_subcommand("template", "Build the external template and per-recording subject templates");
  add_common(tmpl, common);
  tmpl->add_option("--data", data, "Dataset directory")->required();

  auto* prior_cmd = app.add_subcommand("prior", "Build augmented pulse priors from subject templates");
  add_common(prior_cmd, common);
  prior_cmd->add_option("--data", data, "Dataset directory")->required();

  auto* train = app.add_subcommand("train", "Train the denoiser on masked recordings");
  add_common(train, common);
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--out", out, "Checkpoint path")->required();
  train->add_option("--trace", trace, "Loss trace CSV path");

  auto* impute = app.add_subcommand("impute", "Fill missing samples with a trained model");
  add_common(impute, common);
  impute->add_option("--data", data, "Dataset directory")->required();
  impute->add_option("--model", model, "Checkpoint path")->required()->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("eval", "Score imputed recordings against ground truth");
  add_common(evaluate, common);
  evaluate->add_option("--data", data, "Dataset directory")->required();
  evaluate->add_option("--out", out, "Report CSV path")->required();

  auto* sweep = app.add_subcommand("sweep", "Evaluate models and baselines across missingness levels");
  add_common(sweep, common);
  sweep->add_option("--data", data, "Dataset directory of clean recordings")->required();
  sweep->add_option("--out", out, "Output directory for reports and plot data")->required();
  sweep->add_option("--model", models, "Checkpoint to include, repeatable")->check(CLI::ExistingFile);

  auto* ablate = app.add_subcommand("ablate", "Train and compare prior ablation variants");
  add_common(ablate, common);
  ablate->add_option("--data", data, "Dataset directory of clean recordings")->required();
  ablate->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 1);
  }

  try {
    common.load();
    if (*synth) command_synth(common, out);
    else if (*mask) command_mask(common, data);
    else if (*tmpl) command_template(common, data);
    else if (*prior_cmd) command_prior(common, data);
    else if (*train) command_train(common, data, out, trace);
    else if (*impute) command_impute(common, data, model);
    else if (*evaluate) command_eval(common, data, out);
    else if (*sweep) command_sweep(common, data, out, models);
    else if (*ablate) command_ablate(common, data, out);
  } catch (const cli::ConfigError& e) {
    return fail("config", e.what(), 1);
  } catch (const Error& e) {
    const bool validation = e.code() == Errc::invalid_argument || e.code() == Errc::parse;
    return fail(to_string(e.code()), e.what(), validation ? 1 : 2);
  } catch (const json::exception& e) {
    return fail("config", e.what(), 1);
  } catch (const fs::filesystem_error& e) {
    return fail("io", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 2);
  }
  return 0;
}
