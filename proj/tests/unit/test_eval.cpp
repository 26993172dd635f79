#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pulsediff/core/missingness.hpp"
#include "pulsediff/core/synth.hpp"
#include "pulsediff/error.hpp"
#include "pulsediff/eval/imputers.hpp"
#include "pulsediff/eval/metrics.hpp"
#include "pulsediff/eval/sweep.hpp"
#include "pulsediff/prior/extract.hpp"

using namespace pulsediff;
using namespace pulsediff::eval;
using core::BeatSequence;

namespace {

// Maximum one-to-one matching by exhaustive search over assignments.
std::size_t optimal_tp(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth, std::size_t tol) {
  std::vector<bool> used(pred.size(), false);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t i) -> std::size_t {
    if (i == truth.size()) return 0;
    std::size_t result = best(i + 1);
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const std::size_t d = pred[j] > truth[i] ? pred[j] - truth[i] : truth[i] - pred[j];
      if (used[j] || d > tol) continue;
      used[j] = true;
      result = std::max(result, 1 + best(i + 1));
      used[j] = false;
    }
    return result;
  };
  return best(0);
}

std::vector<std::size_t> random_onsets(std::mt19937_64& g, std::size_t max_n, std::size_t span) {
  std::vector<std::size_t> out;
  const std::size_t n = g() % (max_n + 1);
  while (out.size() < n) {
    const std::size_t v = g() % span;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

class FailingImputer final : public Imputer {
 public:
  std::string label() const override { return "Failing"; }
  std::vector<double> impute(const core::Recording& masked, const prior::SubjectTemplate&,
                             std::uint64_t) const override {
    if (masked.values()[0] > -100.0) throw Error(Errc::degenerate, "always fails");
    return {};
  }
};

}  // namespace

TEST_CASE("masked mse") {
  const std::vector<double> truth(10, 0.0);
  std::vector<std::uint8_t> mask(10, 1);
  for (std::size_t i = 0; i < 5; ++i) mask[i * 2] = 0;
  CHECK(masked_mse(truth, truth, mask) == 0.0);
  CHECK(masked_mse(std::vector<double>(10, 1.0), truth, mask) == 1.0);
  CHECK_THROWS_AS(masked_mse(truth, truth, std::vector<std::uint8_t>(10, 1)), Error);
  CHECK_THROWS_AS(masked_mse(truth, std::vector<double>(9, 0.0), mask), Error);

  std::mt19937_64 g(2);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(64), b(64);
    std::vector<std::uint8_t> m(64);
    for (auto& v : a) v = n(g);
    for (auto& v : b) v = n(g);
    for (auto& v : m) v = g() % 2;
    m[0] = 0;
    double sum = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < 64; ++i)
      if (!m[i]) {
        sum += (a[i] - b[i]) * (a[i] - b[i]);
        ++cnt;
      }
    CHECK(std::abs(masked_mse(a, b, m) - sum / cnt) <= 1e-12);
    auto changed = a;
    for (std::size_t i = 0; i < 64; ++i)
      if (m[i]) changed[i] += 10.0;
    CHECK(masked_mse(changed, b, m) == masked_mse(a, b, m));
  }
}

TEST_CASE("template baseline") {
  const prior::PulseTemplate tmpl(std::vector<double>(20, 1.0), 100.0, 0);
  const BeatSequence beats({0, 60}, 100);
  const auto fixed = prior::build_prior(tmpl, beats, 100, {0, 0.0, 1, 1.0}, 0);
  std::vector<double> v(100);
  for (std::size_t i = 0; i < 100; ++i) v[i] = 0.5 + static_cast<double>(i);
  const auto rec = core::Recording::fully_observed(v, 100.0);
  CHECK(template_baseline_impute(rec, fixed) == v);

  std::vector<std::uint8_t> m(100, 1);
  for (std::size_t i = 30; i < 50; ++i) m[i] = 0;  // between placements, prior is zero
  for (std::size_t i = 5; i < 10; ++i) m[i] = 0;   // inside the first placement
  const auto out = template_baseline_impute(rec.with_mask(m), fixed);
  for (std::size_t i = 30; i < 50; ++i) CHECK(out[i] == 0.0);
  for (std::size_t i = 5; i < 10; ++i) CHECK(out[i] == 1.0);
  CHECK(out[20] == v[20]);

  const auto augmented = prior::build_prior(tmpl, beats, 100, {1, 0.0, 2, 1.0}, 0);
  CHECK_THROWS_AS(template_baseline_impute(rec, augmented), Error);
}

TEST_CASE("beat matching") {
  const BeatSequence truth({10, 90, 170}, 300);
  auto m = match_beats(truth, truth, 5);
  CHECK(m.tp == 3);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);

  m = match_beats(BeatSequence({16}, 300), BeatSequence({10}, 300), 5);
  CHECK(m.tp == 0);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(match_beats(BeatSequence({15}, 300), BeatSequence({10}, 300), 5).tp == 1);
  CHECK(match_beats(BeatSequence({5}, 300), BeatSequence({10}, 300), 5).tp == 1);
  CHECK(match_beats(BeatSequence({10}, 300), BeatSequence({10}, 300), 0).tp == 1);

  // Taking the nearest prediction would leave the second truth unmatched.
  m = match_beats(BeatSequence({0, 7}, 300), BeatSequence({4, 10}, 300), 5);
  CHECK(m.tp == 2);

  std::mt19937_64 g(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = random_onsets(g, 8, 60);
    const auto t = random_onsets(g, 8, 60);
    const std::size_t tol = g() % 6;
    const auto r = match_beats(BeatSequence(p, 60), BeatSequence(t, 60), tol);
    CHECK(r.tp == optimal_tp(p, t, tol));
    CHECK(r.tp + r.fp == p.size());
    CHECK(r.tp + r.fn == t.size());
  }
}

TEST_CASE("beat metrics") {
  auto s = beat_metrics(10, 0, 0);
  CHECK(s.precision == 1.0);
  CHECK(s.sensitivity == 1.0);
  CHECK(s.f1 == 1.0);
  s = beat_metrics(0, 0, 5);
  CHECK(s.precision == 0.0);
  CHECK(s.sensitivity == 0.0);
  CHECK(s.f1 == 0.0);
  s = beat_metrics(3, 1, 2);
  CHECK(s.precision == doctest::Approx(0.75));
  CHECK(s.sensitivity == doctest::Approx(0.6));
  CHECK(s.f1 == doctest::Approx(2.0 * 0.45 / 1.35));
  CHECK(beat_metrics(0, 0, 0).f1 == 0.0);
}

TEST_CASE("report aggregation") {
  std::vector<RecordingRow> rows(3);
  rows[0] = {0, 1.0, 1.0, 0.5, 0.0, 0, 0, 0, ""};
  rows[1] = {1, 3.0, 0.5, 1.0, 0.0, 0, 0, 0, ""};
  rows[2].index = 2;
  rows[2].error = "broken";
  const auto r = aggregate("m", core::MissingKind::transient, 0.3, rows);
  CHECK(r.n_recordings == 2);
  CHECK(r.mse == 2.0);
  CHECK(r.precision == 0.75);
  CHECK(r.sensitivity == 0.75);
  CHECK(r.f1 == doctest::Approx(0.75));
  CHECK(r.error.find("broken") != std::string::npos);
  CHECK(r.rows.size() == 3);

  // Relabelling recordings leaves the aggregate unchanged.
  std::vector<RecordingRow> swapped{rows[1], rows[2], rows[0]};
  const auto r2 = aggregate("m", core::MissingKind::transient, 0.3, swapped);
  CHECK(r2.mse == r.mse);
  CHECK(r2.f1 == r.f1);

  const auto empty = aggregate("m", core::MissingKind::extended, 0.3, {rows[2]});
  CHECK(empty.n_recordings == 0);
  CHECK(std::isnan(empty.mse));
}

TEST_CASE("sweep") {
  core::SynthConfig sc;
  std::vector<core::Recording> data;
  std::vector<BeatSequence> truths;
  for (std::uint64_t i = 0; i < 6; ++i) {
    auto [rec, beats] = core::synth_ecg(sc, 50 + i);
    data.push_back(rec);
    truths.push_back(beats);
  }
  const auto ext = prior::build_external_template(data);
  const TemplateImputer tmpl_imp;
  const LinearImputer lin;
  const ZeroFillImputer zero;
  const FailingImputer failing;

  SweepConfig cfg;
  cfg.seed = 3;
  const std::vector<const Imputer*> two{&tmpl_imp, &lin};
  const auto reports = run_sweep(two, data, truths, ext, cfg);
  REQUIRE(reports.size() == 20);
  CHECK(reports[0].model == "Template");
  CHECK(reports[1].model == "Linear");
  CHECK(reports[0].kind == core::MissingKind::transient);
  CHECK(reports[19].kind == core::MissingKind::extended);
  CHECK(reports[19].pct == 0.5);
  for (const auto& r : reports) {
    CHECK(r.n_recordings == 6);
    CHECK(r.f1 == doctest::Approx(f1_score(r.precision, r.sensitivity)));
    CHECK(r.precision >= 0.0);
    CHECK(r.precision <= 1.0);
  }
  const auto again = run_sweep(two, data, truths, ext, cfg);
  CHECK(reports_to_csv(again) == reports_to_csv(reports));

  SUBCASE("model failures are recorded per row") {
    const std::vector<const Imputer*> models{&failing, &zero};
    SweepConfig one;
    one.kinds = {core::MissingKind::transient};
    one.percentages = {0.3};
    const auto r = run_sweep(models, data, {}, ext, one);
    REQUIRE(r.size() == 2);
    CHECK(r[0].n_recordings == 0);
    CHECK(r[0].error.find("always fails") != std::string::npos);
    CHECK(r[1].n_recordings == 6);
  }
  SUBCASE("report and plot layouts") {
    const auto csv = reports_to_csv(reports);
    CHECK(csv.rfind("model,kind,pct,mse,f1,precision,sensitivity,n_recordings\nTemplate,transient,0.1,", 0) == 0);
    const auto plot = plot_csv(reports, "mse", core::MissingKind::extended);
    CHECK(plot.rfind("pct,Template,Linear\n0.1,", 0) == 0);
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 6);
    const auto svg = plot_svg(reports, "f1", core::MissingKind::transient);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK_THROWS_AS(plot_csv(reports, "auc", core::MissingKind::transient), Error);
  }
  SUBCASE("invalid sweeps") {
    CHECK_THROWS_AS(run_sweep({}, data, truths, ext, cfg), Error);
    const std::vector<const Imputer*> one{&lin};
    CHECK_THROWS_AS(run_sweep(one, data, std::span(truths).first(2), ext, cfg), Error);
    auto masked = data;
    masked[0] = core::apply_missingness(data[0], {core::MissingKind::transient, 0.1, 5, 0});
    CHECK_THROWS_AS(run_sweep(one, masked, truths, ext, cfg), Error);
  }
}
