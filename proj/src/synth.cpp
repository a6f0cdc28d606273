#include "agingscope/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>

#include "agingscope/csv.hpp"
#include "agingscope/error.hpp"
#include "agingscope/parallel.hpp"

namespace agingscope::synth {

namespace fs = std::filesystem;

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view experiment, std::string_view stream,
                          std::string_view entity, std::string_view metric) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&](unsigned char byte) {
    h ^= byte;
    h *= 1099511628211ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(base >> (8 * i)));
  for (std::string_view part : {experiment, stream, entity, metric}) {
    mix(0x1f);
    for (char c : part) mix(static_cast<unsigned char>(c));
  }
  return h;
}

namespace {

void check_shape(double noise_sigma, double ar1_phi, double outlier_rate, double outlier_scale,
                 double slope, double intercept, std::string_view what) {
  auto bad = [&](const char* why) {
    return Error(ErrorCode::InvalidSpec, std::string(what) + ": " + why);
  };
  if (!std::isfinite(slope) || !std::isfinite(intercept)) throw bad("slope and intercept must be finite");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw bad("noise_sigma must be >= 0");
  if (!(ar1_phi > -1.0 && ar1_phi < 1.0)) throw bad("ar1_phi must lie in (-1, 1)");
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) throw bad("outlier_rate must lie in [0, 1)");
  if (!std::isfinite(outlier_scale)) throw bad("outlier_scale must be finite");
}

}  // namespace

void validate(const SeriesSpec& spec) {
  if (spec.n < 2) throw Error(ErrorCode::InvalidSpec, "series needs n >= 2");
  if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) throw Error(ErrorCode::InvalidSpec, "dt must be positive");
  check_shape(spec.noise_sigma, spec.ar1_phi, spec.outlier_rate, spec.outlier_scale, spec.slope, spec.intercept,
              "series");
}

std::vector<double> generate_values(const SeriesSpec& spec, std::span<const double> t) {
  check_shape(spec.noise_sigma, spec.ar1_phi, spec.outlier_rate, spec.outlier_scale, spec.slope, spec.intercept,
              "series");
  Rng rng(spec.seed);
  std::vector<double> out;
  out.reserve(t.size());
  double e = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double eps = spec.noise_sigma * rng.normal();
    const double u = rng.uniform();
    e = i == 0 ? eps / std::sqrt(1.0 - spec.ar1_phi * spec.ar1_phi) : spec.ar1_phi * e + eps;
    double x = spec.intercept + spec.slope * t[i] + e;
    if (u < spec.outlier_rate) x *= spec.outlier_scale;
    out.push_back(x);
  }
  return out;
}

model::MetricSeries generate_series(const SeriesSpec& spec, std::string entity, std::string metric) {
  validate(spec);
  std::vector<double> t(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) t[i] = static_cast<double>(i) * spec.dt;
  return model::make_series(std::move(entity), std::move(metric), t, generate_values(spec, t));
}

// --- spec files -----------------------------------------------------------------

namespace {

struct Section {
  std::string header;
  std::size_t line = 0;
  std::map<std::string, std::string> values;
  std::set<std::string> used;

  std::optional<std::string> take(const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    used.insert(key);
    return it->second;
  }
  double number(const std::string& key, double fallback) {
    auto v = take(key);
    if (!v) return fallback;
    try {
      return csv::parse_double(*v, key);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidSpec, "[" + header + "] " + key + ": not a number");
    }
  }
  void finish() const {
    for (const auto& [k, v] : values)
      if (!used.count(k)) throw Error(ErrorCode::InvalidSpec, "[" + header + "] unknown key '" + k + "'");
  }
};

std::vector<Section> parse_ini(std::string_view text) {
  std::vector<Section> sections;
  std::size_t lineno = 0;
  for (const auto& raw : csv::split_lines(text)) {
    ++lineno;
    std::string line = csv::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(lineno) + ": bad section");
      sections.push_back({csv::trim(std::string_view(line).substr(1, line.size() - 2)), lineno, {}, {}});
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || sections.empty())
      throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(lineno) + ": expected key = value in a section");
    std::string key = csv::trim(std::string_view(line).substr(0, eq));
    std::string value = csv::trim(std::string_view(line).substr(eq + 1));
    std::size_t hash = value.find(" #");
    if (hash != std::string::npos) value = csv::trim(std::string_view(value).substr(0, hash));
    if (!sections.back().values.emplace(key, value).second)
      throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return sections;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

StreamSpec read_stream(Section& sec, const std::string& prefix) {
  StreamSpec s;
  s.intercept = sec.number(prefix + "intercept", s.intercept);
  s.slope = sec.number(prefix + "slope", s.slope);
  s.noise_sigma = sec.number(prefix + "noise_sigma", s.noise_sigma);
  s.ar1_phi = sec.number(prefix + "ar1_phi", s.ar1_phi);
  s.outlier_rate = sec.number(prefix + "outlier_rate", s.outlier_rate);
  s.outlier_scale = sec.number(prefix + "outlier_scale", s.outlier_scale);
  return s;
}

}  // namespace

CorpusSpec parse_corpus_spec(std::string_view text, const std::string& base_dir) {
  CorpusSpec spec;
  bool have_plan = false;
  for (Section& sec : parse_ini(text)) {
    auto w = words(sec.header);
    if (w.empty()) throw Error(ErrorCode::InvalidSpec, "empty section name");
    const std::string& kind = w[0];
    if (kind == "corpus" && w.size() == 1) {
      if (auto plan = sec.take("plan")) {
        if (*plan == "plan72") {
          spec.plan = model::bundled_plan72();
        } else {
          fs::path p(*plan);
          if (p.is_relative()) p = fs::path(base_dir) / p;
          spec.plan = model::load_plan_file(p.string());
        }
        have_plan = true;
      }
      if (auto seed = sec.take("seed")) {
        try {
          spec.seed = static_cast<std::uint64_t>(std::stoull(*seed));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidSpec, "[corpus] seed: not an unsigned integer");
        }
      }
      spec.duration_s = sec.number("duration_s", spec.duration_s);
      spec.sample_interval_s = sec.number("sample_interval_s", spec.sample_interval_s);
      spec.launch_cycle_s = sec.number("launch_cycle_s", spec.launch_cycle_s);
      spec.jitter = sec.number("jitter", spec.jitter);
    } else if (kind == "effect" && w.size() == 2) {
      model::FactorName f;
      try {
        f = model::parse_factor(w[1]);
      } catch (const Error&) {
        throw Error(ErrorCode::InvalidSpec, "[" + sec.header + "] unknown factor");
      }
      auto& levels = spec.effects[f];
      for (const auto& [level, v] : sec.values) levels[level] = sec.number(level, 1.0);
    } else if (kind == "launch" && w.size() == 2) {
      spec.launches.push_back({w[1], read_stream(sec, "")});
    } else if (kind == "pss" && w.size() == 2) {
      PssStream p;
      p.process = w[1];
      p.pid = static_cast<std::int64_t>(sec.number("pid", 0.0));
      p.pss = read_stream(sec, "");
      spec.pss.push_back(std::move(p));
    } else if (kind == "gc" && w.size() == 3) {
      GcStream g;
      g.process = w[1];
      g.cause = ingest::parse_gc_cause(w[2]);
      if (auto alg = sec.take("algorithm")) g.algorithm = *alg;
      g.interval_s = sec.number("interval_s", g.interval_s);
      g.total = read_stream(sec, "total.");
      g.pause = read_stream(sec, "pause.");
      spec.gcs.push_back(std::move(g));
    } else if (kind == "task" && w.size() >= 3) {
      TaskStream t;
      t.process = w[1];
      std::string_view rest(sec.header);
      rest.remove_prefix(rest.find(w[1]) + w[1].size());
      t.task_name = csv::trim(rest);
      t.minflt = read_stream(sec, "minflt.");
      t.majflt = read_stream(sec, "majflt.");
      t.utime = read_stream(sec, "utime.");
      t.stime = read_stream(sec, "stime.");
      spec.tasks.push_back(std::move(t));
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown section [" + sec.header + "]");
    }
    sec.finish();
  }
  if (!have_plan) throw Error(ErrorCode::InvalidSpec, "[corpus] plan is required");
  // Unassigned pids are numbered after the largest given one.
  std::int64_t next_pid = 1000;
  for (const auto& p : spec.pss) next_pid = std::max(next_pid, p.pid + 100);
  for (auto& p : spec.pss)
    if (p.pid == 0) {
      p.pid = next_pid;
      next_pid += 100;
    }
  validate(spec);
  return spec;
}

CorpusSpec load_corpus_spec(const std::string& path) {
  return parse_corpus_spec(csv::read_file(path), fs::path(path).parent_path().string());
}

void validate(const CorpusSpec& spec) {
  auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidSpec, why); };
  if (!(spec.sample_interval_s > 0.0)) throw bad("sample_interval_s must be positive");
  if (!(spec.launch_cycle_s > 0.0)) throw bad("launch_cycle_s must be positive");
  if (!(spec.duration_s >= 0.0)) throw bad("duration_s must be >= 0");
  if (!(spec.jitter >= 0.0)) throw bad("jitter must be >= 0");
  auto check = [&](const StreamSpec& s, const std::string& what) {
    check_shape(s.noise_sigma, s.ar1_phi, s.outlier_rate, s.outlier_scale, s.slope, s.intercept, what);
  };
  auto plain_name = [&](const std::string& name, const std::string& what) {
    if (name.empty() || name.find_first_of(" \t,|\"") != std::string::npos)
      throw bad(what + " '" + name + "' must be non-empty without spaces, commas, quotes or '|'");
  };
  std::set<std::string> activities, processes;
  std::set<std::int64_t> pids;
  for (const auto& l : spec.launches) {
    plain_name(l.activity, "activity");
    if (!activities.insert(l.activity).second) throw bad("duplicate activity " + l.activity);
    check(l.lt, "launch " + l.activity);
  }
  for (const auto& p : spec.pss) {
    plain_name(p.process, "process");
    if (!processes.insert(p.process).second) throw bad("duplicate pss process " + p.process);
    if (p.pid <= 0 || !pids.insert(p.pid).second) throw bad("pid for " + p.process + " must be positive and unique");
    check(p.pss, "pss " + p.process);
  }
  std::set<std::pair<std::string, std::string>> gc_keys, task_keys;
  for (const auto& g : spec.gcs) {
    if (!processes.count(g.process)) throw bad("gc process " + g.process + " needs a [pss] section for its pid");
    if (!gc_keys.insert({g.process, g.cause.name}).second) throw bad("duplicate gc stream " + g.process);
    if (!(g.interval_s > 0.0)) throw bad("gc interval_s must be positive");
    check(g.total, "gc " + g.process + " total");
    check(g.pause, "gc " + g.process + " pause");
  }
  for (const auto& t : spec.tasks) {
    if (!processes.count(t.process)) throw bad("task process " + t.process + " needs a [pss] section for its pid");
    if (t.task_name.empty() || t.task_name.find_first_of("\n\r,\"") != std::string::npos)
      throw bad("invalid task name '" + t.task_name + "'");
    if (!task_keys.insert({t.process, t.task_name}).second) throw bad("duplicate task " + t.task_name);
    for (const auto* s : {&t.minflt, &t.majflt, &t.utime, &t.stime}) check(*s, "task " + t.task_name);
  }
  for (const auto& [factor, levels] : spec.effects) {
    auto known = spec.plan.level_sets().find(factor);
    for (const auto& [level, mult] : levels) {
      if (known == spec.plan.level_sets().end() || !known->second.count(level))
        throw bad("effect level " + level + " is not in the plan");
      if (!std::isfinite(mult)) throw bad("effect multipliers must be finite");
    }
  }
}

// --- generation -------------------------------------------------------------------

double experiment_multiplier(const CorpusSpec& spec, const model::ExperimentConfig& config) {
  double m = 1.0;
  for (const auto& [factor, levels] : spec.effects) {
    auto it = levels.find(config.level(factor));
    if (it != levels.end()) m *= it->second;
  }
  if (spec.jitter > 0.0) {
    Rng rng(derive_seed(spec.seed, config.id, "jitter", "", ""));
    m *= 1.0 + spec.jitter * rng.normal();
  }
  return m;
}

namespace {

double round_ms(double t) { return static_cast<double>(std::llround(t * 1000.0)) / 1000.0; }

std::vector<double> stream_values(const CorpusSpec& spec, const StreamSpec& s, double multiplier,
                                  std::span<const double> t, std::string_view exp, std::string_view stream,
                                  std::string_view entity, std::string_view metric) {
  SeriesSpec ss;
  ss.n = t.size();
  ss.slope = s.slope * multiplier;
  ss.intercept = s.intercept;
  ss.noise_sigma = s.noise_sigma;
  ss.ar1_phi = s.ar1_phi;
  ss.outlier_rate = s.outlier_rate;
  ss.outlier_scale = s.outlier_scale;
  ss.seed = derive_seed(spec.seed, exp, stream, entity, metric);
  return generate_values(ss, t);
}

std::int64_t pid_of(const CorpusSpec& spec, std::string_view process) {
  for (const auto& p : spec.pss)
    if (p.process == process) return p.pid;
  return 1000;
}

}  // namespace

ingest::ExperimentCapture generate_experiment(const CorpusSpec& spec, const model::ExperimentConfig& config) {
  ingest::ExperimentCapture cap;
  cap.experiment_id = config.id;
  const double duration = spec.duration_s > 0.0 ? spec.duration_s : config.duration_s;
  const double mult = experiment_multiplier(spec, config);
  const std::string& exp = config.id;

  // Launches: one per activity per cycle, evenly spread inside the cycle.
  const std::size_t cycles = static_cast<std::size_t>(std::floor(duration / spec.launch_cycle_s));
  const std::size_t nact = spec.launches.size();
  for (std::size_t k = 0; k < nact; ++k) {
    const auto& l = spec.launches[k];
    std::vector<double> t(cycles);
    for (std::size_t c = 0; c < cycles; ++c)
      t[c] = round_ms(static_cast<double>(c) * spec.launch_cycle_s +
                      static_cast<double>(k) * spec.launch_cycle_s / static_cast<double>(nact));
    auto v = stream_values(spec, l.lt, mult, t, exp, "launch", l.activity, ingest::kLaunchMetric);
    for (std::size_t c = 0; c < cycles; ++c)
      cap.launches.push_back({t[c], l.activity, static_cast<double>(std::max<long long>(1, std::llround(v[c])))});
  }
  std::stable_sort(cap.launches.begin(), cap.launches.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });

  for (const auto& g : spec.gcs) {
    const std::size_t n = static_cast<std::size_t>(std::floor(duration / g.interval_s));
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = round_ms(static_cast<double>(i) * g.interval_s);
    const std::string key = ingest::cause_key(g.cause);
    auto total = stream_values(spec, g.total, mult, t, exp, "gc", g.process, "total." + key);
    auto pause = stream_values(spec, g.pause, mult, t, exp, "gc", g.process, "pause." + key);
    Rng sizes(derive_seed(spec.seed, exp, "gc-sizes", g.process, key));
    for (std::size_t i = 0; i < n; ++i) {
      ingest::GcEvent e;
      e.t = t[i];
      e.process = g.process;
      e.cause = g.cause;
      e.algorithm = g.algorithm;
      e.freed_objects = 1000 + static_cast<std::uint64_t>(sizes.uniform() * 200000.0);
      e.freed_bytes = (1 + static_cast<std::uint64_t>(sizes.uniform() * 16.0)) * 1024ULL * 1024ULL;
      e.los_objects = static_cast<std::uint64_t>(sizes.uniform() * 64.0);
      e.los_bytes = e.los_objects * 16ULL * 1024ULL;
      const long long total_us = std::max<long long>(1, std::llround(total[i] * 1000.0));
      const long long pause_us = std::clamp<long long>(std::llround(pause[i] * 1000.0), 1, total_us);
      e.total_ms = static_cast<double>(total_us) / 1000.0;
      e.pause_ms = {static_cast<double>(pause_us) / 1000.0};
      cap.gcs.push_back(std::move(e));
    }
  }
  std::stable_sort(cap.gcs.begin(), cap.gcs.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  const std::size_t samples = static_cast<std::size_t>(std::floor(duration / spec.sample_interval_s));
  std::vector<double> ts(samples);
  for (std::size_t i = 0; i < samples; ++i) ts[i] = static_cast<double>(i) * spec.sample_interval_s;

  std::vector<std::vector<double>> pss_values;
  for (const auto& p : spec.pss)
    pss_values.push_back(stream_values(spec, p.pss, mult, ts, exp, "pss", p.process, ingest::kPssMetric));

  struct Counters {
    std::int64_t pid = 0;
    std::int64_t tid = 0;
    std::array<std::vector<double>, 4> rates;
    std::array<std::uint64_t, 4> sums{};
  };
  std::vector<Counters> counters;
  std::map<std::string, std::int64_t> next_tid;
  for (const auto& t : spec.tasks) {
    Counters c;
    c.pid = pid_of(spec, t.process);
    auto [it, fresh] = next_tid.try_emplace(t.process, c.pid + 1);
    c.tid = it->second++;
    const std::string entity = t.process + "|" + t.task_name;
    c.rates[0] = stream_values(spec, t.minflt, mult, ts, exp, "task", entity, "minflt");
    c.rates[1] = stream_values(spec, t.majflt, mult, ts, exp, "task", entity, "majflt");
    c.rates[2] = stream_values(spec, t.utime, mult, ts, exp, "task", entity, "utime_ticks");
    c.rates[3] = stream_values(spec, t.stime, mult, ts, exp, "task", entity, "stime_ticks");
    counters.push_back(std::move(c));
  }

  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t p = 0; p < spec.pss.size(); ++p)
      cap.pss.push_back({ts[i], spec.pss[p].process, spec.pss[p].pid,
                         static_cast<double>(std::max<long long>(1, std::llround(pss_values[p][i])))});
    for (std::size_t k = 0; k < spec.tasks.size(); ++k) {
      auto& c = counters[k];
      for (std::size_t m = 0; m < 4; ++m)
        c.sums[m] += static_cast<std::uint64_t>(std::max<long long>(0, std::llround(c.rates[m][i])));
      ingest::TaskSample s;
      s.t = ts[i];
      s.process = spec.tasks[k].process;
      s.pid = c.pid;
      s.tid = c.tid;
      s.task_name = spec.tasks[k].task_name;
      s.minflt = c.sums[0];
      s.majflt = c.sums[1];
      s.utime_ticks = c.sums[2];
      s.stime_ticks = c.sums[3];
      cap.tasks.push_back(std::move(s));
    }
  }
  return cap;
}

std::string render_logcat(const CorpusSpec& spec, const ingest::ExperimentCapture& capture) {
  const std::int64_t am_pid = spec.pss.empty() ? 1000 : pid_of(spec, "system");
  std::string out;
  char head[96];
  auto envelope = [&](double t, std::int64_t pid, std::int64_t tid, const char* tag) {
    std::snprintf(head, sizeof head, "%s %5lld %5lld I %-8s: ", ingest::format_logcat_timestamp(t).c_str(),
                  static_cast<long long>(pid), static_cast<long long>(tid), tag);
    out += head;
  };
  envelope(0.0, am_pid, am_pid, "agingscope");
  out += "capture start " + capture.experiment_id + "\n";
  std::size_t li = 0, gi = 0;
  while (li < capture.launches.size() || gi < capture.gcs.size()) {
    const bool take_launch =
        gi == capture.gcs.size() || (li < capture.launches.size() && capture.launches[li].t <= capture.gcs[gi].t);
    if (take_launch) {
      const auto& l = capture.launches[li++];
      envelope(l.t, am_pid, am_pid + 20, "ActivityManager");
      out += "Displayed " + l.activity + ": " +
             ingest::format_android_duration(static_cast<std::int64_t>(std::llround(l.launch_time_ms))) + "\n";
    } else {
      const auto& g = capture.gcs[gi++];
      const std::int64_t pid = pid_of(spec, g.process);
      envelope(g.t, pid, pid + 7, "art");
      out += ingest::format_gc_message(g) + "\n";
    }
  }
  return out;
}

std::string render_pss_csv(const ingest::ExperimentCapture& capture) { return ingest::format_pss_csv(capture.pss); }

std::string render_tasks_csv(const ingest::ExperimentCapture& capture) {
  return ingest::format_tasks_csv(capture.tasks);
}

std::vector<ManifestEntry> generate_log_corpus(const CorpusSpec& spec, const std::string& out_dir, std::size_t jobs) {
  validate(spec);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir + ": " + ec.message());
  const auto& exps = spec.plan.experiments();
  std::vector<ManifestEntry> entries(exps.size());
  parallel_for(exps.size(), jobs, [&](std::size_t i) {
    const auto& config = exps[i];
    const auto cap = generate_experiment(spec, config);
    const fs::path dir = fs::path(out_dir) / config.id;
    std::error_code dir_ec;
    fs::create_directories(dir, dir_ec);
    if (dir_ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + dir_ec.message());
    csv::write_file((dir / "logcat.txt").string(), render_logcat(spec, cap));
    csv::write_file((dir / "pss.csv").string(), render_pss_csv(cap));
    csv::write_file((dir / "tasks.csv").string(), render_tasks_csv(cap));
    entries[i] = {config.id, dir.string(), cap.launches.size(), cap.gcs.size(), cap.pss.size(), cap.tasks.size()};
  });
  csv::write_file((fs::path(out_dir) / "plan.csv").string(), model::format_plan_csv(spec.plan));
  std::string manifest = "experiment,directory,launches,gcs,pss,tasks\n";
  for (const auto& e : entries)
    manifest += csv::join_row({e.experiment, e.directory, std::to_string(e.launches), std::to_string(e.gcs),
                               std::to_string(e.pss), std::to_string(e.tasks)}) +
                "\n";
  csv::write_file((fs::path(out_dir) / "manifest.csv").string(), manifest);
  return entries;
}

}  // namespace agingscope::synth
