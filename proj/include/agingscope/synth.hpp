#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agingscope/ingest.hpp"
#include "agingscope/model.hpp"

namespace agingscope::synth {

/// mt19937_64 with 53-bit uniforms and Box-Muller normals, so streams are
/// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// FNV-1a over the base seed and the identifying strings.
std::uint64_t derive_seed(std::uint64_t base, std::string_view experiment, std::string_view stream,
                          std::string_view entity, std::string_view metric);

struct SeriesSpec {
  std::size_t n = 2;
  double dt = 30.0;
  double slope = 0.0;  // units per second
  double intercept = 0.0;
  double noise_sigma = 0.0;
  double ar1_phi = 0.0;
  double outlier_rate = 0.0;
  double outlier_scale = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SeriesSpec& spec);

/// x(t) = intercept + slope * t + e(t) with AR(1) Gaussian noise started from
/// its stationary law; selected values are multiplied by outlier_scale.
std::vector<double> generate_values(const SeriesSpec& spec, std::span<const double> t);
/// Samples at t = i * dt.
model::MetricSeries generate_series(const SeriesSpec& spec, std::string entity = "synthetic",
                                    std::string metric = "value");

// --- corpora -------------------------------------------------------------------

/// Shape of one generated stream; n, dt and seed come from the corpus.
struct StreamSpec {
  double intercept = 0.0;
  double slope = 0.0;
  double noise_sigma = 0.0;
  double ar1_phi = 0.0;
  double outlier_rate = 0.0;
  double outlier_scale = 1.0;
};

struct LaunchStream {
  std::string activity;
  StreamSpec lt;  // ms
};

struct PssStream {
  std::string process;
  std::int64_t pid = 0;
  StreamSpec pss;  // kB
};

struct GcStream {
  std::string process;
  ingest::GcCause cause;
  std::string algorithm = "concurrent mark sweep";
  double interval_s = 60.0;
  StreamSpec total;  // ms
  StreamSpec pause;  // ms
};

struct TaskStream {
  std::string process;
  std::string task_name;
  // Per-interval increments; counters are their running sums.
  StreamSpec minflt;
  StreamSpec majflt;
  StreamSpec utime;
  StreamSpec stime;
};

struct CorpusSpec {
  model::ExperimentPlan plan;
  std::uint64_t seed = 1;
  double duration_s = 0.0;  // 0: use each experiment's duration
  double sample_interval_s = 30.0;
  double launch_cycle_s = 60.0;
  /// Relative spread of the per-experiment slope multiplier.
  double jitter = 0.0;
  /// Slope multipliers per factor level; experiments multiply the factors they hold.
  std::map<model::FactorName, std::map<std::string, double>> effects;
  std::vector<LaunchStream> launches;
  std::vector<PssStream> pss;
  std::vector<GcStream> gcs;
  std::vector<TaskStream> tasks;
};

/// INI-style spec: sections [corpus], [effect FACTOR], [launch ACTIVITY],
/// [pss PROCESS], [gc PROCESS CAUSE] and [task PROCESS NAME]. A relative plan
/// path is resolved against `base_dir`; `plan = plan72` selects the bundled plan.
CorpusSpec parse_corpus_spec(std::string_view text, const std::string& base_dir = ".");
CorpusSpec load_corpus_spec(const std::string& path);
void validate(const CorpusSpec& spec);

/// Slope multiplier applied to every stream of an experiment.
double experiment_multiplier(const CorpusSpec& spec, const model::ExperimentConfig& config);

/// Ground truth for one experiment, exactly as ingest will recover it.
ingest::ExperimentCapture generate_experiment(const CorpusSpec& spec, const model::ExperimentConfig& config);

std::string render_logcat(const CorpusSpec& spec, const ingest::ExperimentCapture& capture);
std::string render_pss_csv(const ingest::ExperimentCapture& capture);
std::string render_tasks_csv(const ingest::ExperimentCapture& capture);

struct ManifestEntry {
  std::string experiment;
  std::string directory;
  std::size_t launches = 0;
  std::size_t gcs = 0;
  std::size_t pss = 0;
  std::size_t tasks = 0;

  std::size_t record_count() const { return launches + gcs + pss + tasks; }
};

/// Writes `<out_dir>/<exp>/{logcat.txt,pss.csv,tasks.csv}`, `plan.csv` and
/// `manifest.csv`. Entries follow plan order.
std::vector<ManifestEntry> generate_log_corpus(const CorpusSpec& spec, const std::string& out_dir,
                                               std::size_t jobs = 1);

}  // namespace agingscope::synth
