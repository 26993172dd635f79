#include "pulsediff/eval/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "pulsediff/binary_io.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/eval/metrics.hpp"
#include "pulsediff/parallel.hpp"
#include "pulsediff/prior/detect.hpp"
#include "pulsediff/prior/extract.hpp"
#include "pulsediff/rng.hpp"

namespace pulsediff::eval {

EvalReport aggregate(std::string model, core::MissingKind kind, double pct, std::vector<RecordingRow> rows) {
  EvalReport rep;
  rep.model = std::move(model);
  rep.kind = kind;
  rep.pct = pct;
  double mse = 0.0, prec = 0.0, sens = 0.0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      if (rep.error.empty()) rep.error = "recording " + std::to_string(r.index) + ": " + r.error;
      continue;
    }
    mse += r.mse;
    prec += r.precision;
    sens += r.sensitivity;
    ++rep.n_recordings;
  }
  if (rep.n_recordings == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.mse = rep.precision = rep.sensitivity = rep.f1 = nan;
  } else {
    const double n = static_cast<double>(rep.n_recordings);
    rep.mse = mse / n;
    rep.precision = prec / n;
    rep.sensitivity = sens / n;
    rep.f1 = f1_score(rep.precision, rep.sensitivity);
  }
  rep.rows = std::move(rows);
  return rep;
}

RecordingRow score_recording(std::size_t index, std::span<const double> imputed, const core::Recording& masked,
                             const core::BeatSequence& truth, const prior::PulseTemplate& subject_template) {
  RecordingRow row;
  row.index = index;
  row.mse = masked_mse(imputed, masked.values(), masked.mask());
  const double fs = masked.sample_rate_hz();
  const auto pred = prior::matched_filter_detect(imputed, subject_template, fs);
  const auto tol = static_cast<std::size_t>(std::lround(kBeatToleranceS * fs));
  const auto m = match_beats(pred, truth, tol);
  const auto s = beat_metrics(m.tp, m.fp, m.fn);
  row.tp = m.tp;
  row.fp = m.fp;
  row.fn = m.fn;
  row.precision = s.precision;
  row.sensitivity = s.sensitivity;
  row.f1 = s.f1;
  return row;
}

namespace {

std::uint64_t pct_id(double pct) { return static_cast<std::uint64_t>(std::llround(pct * 1e6)); }

struct Prepared {
  std::optional<core::Recording> masked;
  std::optional<prior::SubjectTemplate> subject;
  std::string error;
};

}  // namespace

std::vector<EvalReport> run_sweep(std::span<const Imputer* const> models, std::span<const core::Recording> dataset,
                                  std::span<const core::BeatSequence> truths, const prior::PulseTemplate& external,
                                  const SweepConfig& cfg) {
  if (models.empty()) throw Error(Errc::invalid_argument, "sweep needs at least one model");
  if (dataset.empty()) throw Error(Errc::invalid_argument, "sweep needs at least one recording");
  if (!truths.empty() && truths.size() != dataset.size())
    throw Error(Errc::invalid_argument, "sweep: " + std::to_string(truths.size()) + " beat files for " +
                                            std::to_string(dataset.size()) + " recordings");
  if (cfg.kinds.empty() || cfg.percentages.empty())
    throw Error(Errc::invalid_argument, "sweep needs at least one kind and one percentage");
  for (const auto* m : models)
    if (m == nullptr) throw Error(Errc::invalid_argument, "sweep: null model");
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (!dataset[i].fully_observed())
      throw Error(Errc::invalid_argument, "sweep: recording " + std::to_string(i) + " already has missing samples");
  for (double p : cfg.percentages) {
    core::MissingnessSpec probe{cfg.kinds.front(), p, cfg.packet_len_samples, cfg.seed};
    probe.validate();
  }

  const std::size_t n = dataset.size();
  std::vector<core::BeatSequence> truth(n);
  if (truths.empty()) {
    parallel_for(n, [&](std::size_t i) { truth[i] = prior::two_pass_template(dataset[i], external).beats; });
  } else {
    std::copy(truths.begin(), truths.end(), truth.begin());
  }

  std::vector<EvalReport> out;
  for (std::size_t ki = 0; ki < cfg.kinds.size(); ++ki) {
    for (std::size_t pi = 0; pi < cfg.percentages.size(); ++pi) {
      const auto kind = cfg.kinds[ki];
      const double pct = cfg.percentages[pi];
      std::vector<Prepared> prep(n);
      parallel_for(n, [&](std::size_t i) {
        try {
          core::MissingnessSpec spec{kind, pct, cfg.packet_len_samples,
                                     derive_seed(cfg.seed, "sweep.mask", {ki, pct_id(pct), i})};
          prep[i].masked = core::apply_missingness(dataset[i], spec);
          prep[i].subject = prior::two_pass_template(*prep[i].masked, external);
        } catch (const std::exception& e) {
          prep[i].error = e.what();
        }
      });
      for (const auto* model : models) {
        std::vector<RecordingRow> rows(n);
        parallel_for(n, [&](std::size_t i) {
          rows[i].index = i;
          if (!prep[i].error.empty()) {
            rows[i].error = prep[i].error;
            return;
          }
          try {
            const auto seed = derive_seed(cfg.seed, "sweep.impute", {ki, pct_id(pct), i});
            const auto imputed = model->impute(*prep[i].masked, *prep[i].subject, seed);
            rows[i] = score_recording(i, imputed, *prep[i].masked, truth[i], prep[i].subject->tmpl);
          } catch (const std::exception& e) {
            rows[i].error = e.what();
          }
        });
        out.push_back(aggregate(model->label(), kind, pct, std::move(rows)));
      }
    }
  }
  return out;
}

std::string reports_to_csv(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << "model,kind,pct,mse,f1,precision,sensitivity,n_recordings\n";
  for (const auto& r : reports) {
    os << r.model << ',' << core::to_string(r.kind) << ',' << io::format_double(r.pct) << ','
       << io::format_double(r.mse) << ',' << io::format_double(r.f1) << ',' << io::format_double(r.precision)
       << ',' << io::format_double(r.sensitivity) << ',' << r.n_recordings << '\n';
  }
  return os.str();
}

namespace {

double metric_of(const EvalReport& r, std::string_view metric) {
  if (metric == "mse") return r.mse;
  if (metric == "f1") return r.f1;
  if (metric == "precision") return r.precision;
  if (metric == "sensitivity") return r.sensitivity;
  throw Error(Errc::invalid_argument, "unknown metric '" + std::string(metric) + "'");
}

struct Series {
  std::vector<double> pcts;
  std::vector<std::string> models;
  std::vector<std::vector<double>> values;  // [model][pct], NaN when absent
};

Series collect(std::span<const EvalReport> reports, std::string_view metric, core::MissingKind kind) {
  Series s;
  for (const auto& r : reports) {
    if (r.kind != kind) continue;
    if (std::find(s.pcts.begin(), s.pcts.end(), r.pct) == s.pcts.end()) s.pcts.push_back(r.pct);
    if (std::find(s.models.begin(), s.models.end(), r.model) == s.models.end()) s.models.push_back(r.model);
  }
  std::sort(s.pcts.begin(), s.pcts.end());
  s.values.assign(s.models.size(), std::vector<double>(s.pcts.size(), std::numeric_limits<double>::quiet_NaN()));
  for (const auto& r : reports) {
    if (r.kind != kind) continue;
    const auto mi = std::find(s.models.begin(), s.models.end(), r.model) - s.models.begin();
    const auto pi = std::find(s.pcts.begin(), s.pcts.end(), r.pct) - s.pcts.begin();
    s.values[mi][pi] = metric_of(r, metric);
  }
  return s;
}

}  // namespace

std::string plot_csv(std::span<const EvalReport> reports, std::string_view metric, core::MissingKind kind) {
  const auto s = collect(reports, metric, kind);
  std::ostringstream os;
  os << "pct";
  for (const auto& m : s.models) os << ',' << m;
  os << '\n';
  for (std::size_t p = 0; p < s.pcts.size(); ++p) {
    os << io::format_double(s.pcts[p]);
    for (std::size_t m = 0; m < s.models.size(); ++m) {
      os << ',';
      if (!std::isnan(s.values[m][p])) os << io::format_double(s.values[m][p]);
    }
    os << '\n';
  }
  return os.str();
}

std::string plot_svg(std::span<const EvalReport> reports, std::string_view metric, core::MissingKind kind) {
  const auto s = collect(reports, metric, kind);
  constexpr double W = 640, H = 400, left = 70, right = 160, top = 40, bottom = 50;
  constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!s.pcts.empty()) {
    xmin = s.pcts.front();
    xmax = s.pcts.back();
  }
  bool any = false;
  for (const auto& row : s.values)
    for (double v : row) {
      if (std::isnan(v)) continue;
      if (!any) ymin = ymax = v;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
      any = true;
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };
  auto num = [](double v) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(2);
    o << v;
    return o.str();
  };
  auto tick = [](double v) {
    std::ostringstream o;
    o.precision(4);
    o << v;
    return o.str();
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(W / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << metric << " ("
     << core::to_string(kind) << ")</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  for (double p : s.pcts)
    os << "<text x=\"" << num(px(p)) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">"
       << tick(p * 100) << "%</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << tick(v)
       << "</text>\n";
  }
  os << "<text x=\"" << num((left + W - right) / 2) << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\">missing percentage</text>\n";
  for (std::size_t m = 0; m < s.models.size(); ++m) {
    const char* colour = palette[m % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t p = 0; p < s.pcts.size(); ++p) {
      if (std::isnan(s.values[m][p])) continue;
      if (!first) os << ' ';
      os << num(px(s.pcts[p])) << ',' << num(py(s.values[m][p]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 18.0 * static_cast<double>(m);
    os << "<line x1=\"" << W - right + 12 << "\" y1=\"" << num(ly) << "\" x2=\"" << W - right + 32 << "\" y2=\""
       << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - right + 38 << "\" y=\"" << num(ly + 4) << "\">" << s.models[m] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pulsediff::eval
