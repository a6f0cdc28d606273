#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <iterator>
#include <optional>
#include <tuple>

#include <json.hpp>

#include "agingscope/aging.hpp"
#include "agingscope/csv.hpp"
#include "agingscope/groupstats.hpp"
#include "agingscope/ingest.hpp"
#include "agingscope/model.hpp"
#include "agingscope/parallel.hpp"
#include "agingscope/store.hpp"
#include "agingscope/synth.hpp"
#include "agingscope/trend.hpp"

namespace agingscope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return kUsage;
    case ErrorCode::MalformedDuration:
    case ErrorCode::MalformedGcLine:
    case ErrorCode::BadHeader:
    case ErrorCode::NonNumericField:
    case ErrorCode::MalformedStatLine:
    case ErrorCode::InvalidSpec:
    case ErrorCode::IoFailure:
      return kBadData;
    default:
      return kPrecondition;
  }
}

namespace {

// --- report tables ----------------------------------------------------------------

json num(double v) {
  if (std::isfinite(v)) return v;
  return csv::format_double(v);
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string cell_text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  return csv::format_double(v.get<double>());
}

std::string render(const Table& t, const std::string& format) {
  if (format == "json") {
    json arr = json::array();
    for (const auto& row : t.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
      arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
  }
  std::string out = csv::join_row(t.columns) + "\n";
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (const auto& v : row) cells.push_back(cell_text(v));
    out += csv::join_row(cells) + "\n";
  }
  return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    csv::write_file(path, text);
  }
}

std::string report_format(const RunConfig& cfg, const char* fallback) {
  return cfg.format.empty() ? std::string(fallback) : cfg.format;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

// --- selectors ------------------------------------------------------------------

struct Selector {
  std::string metric;
  std::string entity = "*";

  bool matches(const store::VerdictRecord& r) const {
    return r.metric == metric && (entity == "*" || r.entity == entity);
  }
  std::string label() const { return metric + "@" + entity; }
};

Selector parse_selector(const std::string& text) {
  Selector s;
  const std::size_t at = text.find('@');
  s.metric = csv::trim(text.substr(0, at));
  if (at != std::string::npos) s.entity = csv::trim(text.substr(at + 1));
  if (s.metric.empty() || s.entity.empty())
    throw Error(ErrorCode::InvalidArgument, "selector '" + text + "' must look like METRIC@ENTITY");
  return s;
}

// (metric, entity) -> experiment -> slope
using SlopeTable = std::map<std::pair<std::string, std::string>, std::map<std::string, double>>;

SlopeTable slope_table(const store::VerdictSet& set) {
  SlopeTable t;
  for (const auto& r : set.verdicts)
    if (std::isfinite(r.verdict.slope)) t[{r.metric, r.entity}][r.experiment] = r.verdict.slope;
  return t;
}

// --- ingest ---------------------------------------------------------------------

struct ExperimentInput {
  std::string id;
  fs::path path;
  bool logcat_file = false;
};

bool is_experiment_dir(const fs::path& dir) {
  for (const char* f : {"logcat.txt", "pss.csv", "tasks.csv"})
    if (fs::exists(dir / f)) return true;
  return false;
}

std::vector<ExperimentInput> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<ExperimentInput> out;
  for (const auto& raw : inputs) {
    const fs::path p(raw);
    if (!fs::exists(p)) throw Error(ErrorCode::IoFailure, "no such file or directory: " + raw);
    if (fs::is_regular_file(p)) {
      out.push_back({p.stem().string(), p, true});
    } else if (is_experiment_dir(p)) {
      out.push_back({fs::absolute(p).lexically_normal().filename().string(), p, false});
      if (out.back().id.empty()) out.back().id = fs::absolute(p).parent_path().filename().string();
    } else {
      std::vector<fs::path> subdirs;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_directory() && is_experiment_dir(entry.path())) subdirs.push_back(entry.path());
      std::sort(subdirs.begin(), subdirs.end());
      for (const auto& d : subdirs) out.push_back({d.filename().string(), d, false});
    }
  }
  std::set<std::string> ids;
  for (const auto& e : out)
    if (!ids.insert(e.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate experiment id '" + e.id + "'");
  return out;
}

std::size_t row_count(const std::vector<model::MetricSeries>& series) {
  std::size_t n = 0;
  for (const auto& s : series) n += s.size();
  return n;
}

}  // namespace

int cmd_ingest(const RunConfig& cfg, const IngestOptions& opt, std::ostream& out, std::ostream& err) {
  const auto inputs = collect_inputs(opt.inputs);
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + opt.out_dir + ": " + ec.message());

  struct Result {
    std::size_t records = 0, series = 0, rows = 0, skipped_bytes = 0;
    std::vector<ingest::ParseIssue> errors;
  };
  std::vector<Result> results(inputs.size());
  ingest::LogcatOptions lopt;
  lopt.line_interval_s = opt.line_interval_s;
  parallel_for(inputs.size(), cfg.jobs, [&](std::size_t i) {
    const auto& in = inputs[i];
    ingest::ExperimentCapture cap;
    if (in.logcat_file) {
      cap.experiment_id = in.id;
      ingest::parse_logcat_text(csv::read_file(in.path.string()), lopt, in.path.string(), cap);
    } else {
      cap = ingest::ingest_experiment_dir(in.path.string(), lopt);
      cap.experiment_id = in.id;
    }
    const auto series = ingest::build_experiment_series(cap);
    store::write_series_store((fs::path(opt.out_dir) / (in.id + std::string(store::kSeriesStoreSuffix))).string(),
                              series);
    results[i] = {cap.record_count(), series.size(), row_count(series), cap.skipped_bytes, cap.errors};
  });

  Table summary{{"experiment", "records", "series", "rows", "parse_errors", "skipped_bytes"}, {}};
  std::size_t total = 0, total_errors = 0;
  std::string error_csv = "experiment,file,line,message\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& r = results[i];
    total += r.records;
    total_errors += r.errors.size();
    summary.rows.push_back({inputs[i].id, r.records, r.series, r.rows, r.errors.size(), r.skipped_bytes});
    for (const auto& e : r.errors) {
      err << e.file << ":" << e.line << ": " << e.message << "\n";
      error_csv += csv::join_row({inputs[i].id, e.file, std::to_string(e.line), e.message}) + "\n";
    }
  }
  csv::write_file((fs::path(opt.out_dir) / "ingest_errors.csv").string(), error_csv);
  out << render(summary, report_format(cfg, "csv"));
  if (total_errors) err << total_errors << " parse error(s)\n";
  if (total == 0) {
    err << "error: no records\n";
    return kBadData;
  }
  return kOk;
}

int cmd_detect(const RunConfig& cfg, const DetectOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  for (const auto& raw : opt.inputs) {
    const fs::path p(raw);
    if (!fs::exists(p)) throw Error(ErrorCode::IoFailure, "no such file or directory: " + raw);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > store::kSeriesStoreSuffix.size() &&
            name.ends_with(store::kSeriesStoreSuffix))
          files.push_back(entry.path());
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    err << "error: no series stores found\n";
    return kBadData;
  }
  const trend::Alpha alpha(cfg.alpha);
  std::vector<store::VerdictSet> parts(files.size());
  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    std::string experiment = files[i].filename().string();
    if (experiment.ends_with(store::kSeriesStoreSuffix))
      experiment.resize(experiment.size() - store::kSeriesStoreSuffix.size());
    for (const auto& s : store::load_series_store(files[i].string())) {
      model::MetricSeries prepared = s;
      std::string transform = "raw";
      try {
        if (s.kind == model::SeriesKind::Cumulative) {
          prepared = model::to_rate_series(s);
          transform = "rate";
        }
        if (prepared.size() < trend::kMinTrendSamples) {
          parts[i].skipped.push_back({experiment, s.entity, s.metric, prepared.size(),
                                      "fewer than " + std::to_string(trend::kMinTrendSamples) + " samples"});
          continue;
        }
        parts[i].verdicts.push_back({experiment, s.entity, s.metric, transform, trend::detect_trend(prepared, alpha)});
      } catch (const Error& e) {
        parts[i].skipped.push_back({experiment, s.entity, s.metric, prepared.size(), e.what()});
      }
    }
  });
  store::VerdictSet merged;
  merged.alpha = cfg.alpha;
  for (auto& p : parts) {
    std::move(p.verdicts.begin(), p.verdicts.end(), std::back_inserter(merged.verdicts));
    std::move(p.skipped.begin(), p.skipped.end(), std::back_inserter(merged.skipped));
  }
  const std::string format = report_format(cfg, "json");
  emit(format == "csv" ? store::format_verdicts_csv(merged) : store::format_verdicts_json(merged), opt.out, out);
  std::size_t declared = 0;
  for (const auto& v : merged.verdicts) declared += v.verdict.declared ? 1 : 0;
  err << merged.verdicts.size() << " verdict(s), " << declared << " declared, " << merged.skipped.size()
      << " skipped\n";
  for (const auto& s : merged.skipped)
    err << "skipped " << s.experiment << " " << s.entity << "/" << s.metric << " (n=" << s.n << "): " << s.reason
        << "\n";
  return kOk;
}

int cmd_compare(const RunConfig& cfg, const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  model::ExperimentPlan plan = opt.plan.empty() ? model::bundled_plan72() : model::load_plan_file(opt.plan);
  for (const auto& w : opt.where) {
    const std::size_t eq = w.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--where expects FACTOR=LEVEL");
    plan = plan.restrict(model::parse_factor(csv::trim(w.substr(0, eq))), csv::trim(w.substr(eq + 1)));
  }
  const model::FactorName factor = model::parse_factor(opt.factor);
  const trend::Alpha alpha(cfg.alpha);
  const auto set = store::load_verdicts(opt.verdicts);
  const SlopeTable slopes = slope_table(set);

  std::vector<Selector> selectors;
  for (const auto& r : opt.responses) selectors.push_back(parse_selector(r));
  std::vector<std::pair<std::string, std::string>> responses;
  for (const auto& [key, per_exp] : slopes) {
    if (!selectors.empty() &&
        std::none_of(selectors.begin(), selectors.end(), [&](const Selector& s) {
          return s.metric == key.first && (s.entity == "*" || s.entity == key.second);
        }))
      continue;
    responses.push_back(key);
  }

  Table table{{"response", "factor", "shapiro_p", "normal", "levene_p", "homoscedastic", "routed", "p_value",
               "significant", "statistic", "levels", "n", "series_id", "experiments"},
              {}};
  std::vector<std::optional<std::vector<json>>> rows(responses.size());
  std::vector<std::string> warnings(responses.size());
  parallel_for(responses.size(), cfg.jobs, [&](std::size_t i) {
    const auto& [metric, entity] = responses[i];
    const auto& per_exp = slopes.at(responses[i]);
    std::set<std::string> ids;
    for (const auto& e : plan.experiments())
      if (per_exp.count(e.id)) ids.insert(e.id);
    const model::ExperimentPlan sub = plan.restrict_ids(ids);
    model::partition_by_factor(sub, factor);  // balanced design check; throws when unpaired
    groupstats::GroupedSlopes grouped;
    grouped.factor = factor;
    std::vector<std::string> used;
    for (const auto& e : sub.experiments()) {
      grouped.groups[e.level(factor)].push_back(per_exp.at(e.id));
      used.push_back(e.id);
    }
    std::vector<std::string> levels;
    for (const auto& [level, v] : grouped.groups) levels.push_back(level);
    try {
      const auto c = groupstats::compare_groups(grouped, alpha);
      rows[i] = std::vector<json>{metric + "@" + entity,
                                  std::string(model::to_string(factor)),
                                  num(c.shapiro_p),
                                  c.normal,
                                  num(c.levene_p),
                                  c.homoscedastic,
                                  std::string(groupstats::to_string(c.routed_test)),
                                  num(c.p_value),
                                  c.significant,
                                  num(c.statistic),
                                  join(levels, ";"),
                                  used.size(),
                                  entity + "/" + metric,
                                  join(used, ";")};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnpairedConfig || e.code() == ErrorCode::SingleLevel) throw;
      warnings[i] = metric + "@" + entity + ": " + e.what();
    }
  });
  std::size_t failures = 0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (rows[i]) table.rows.push_back(std::move(*rows[i]));
    if (!warnings[i].empty()) {
      err << "warning: " << warnings[i] << "\n";
      ++failures;
    }
  }
  emit(render(table, report_format(cfg, "csv")), opt.out, out);
  if (table.rows.empty()) {
    err << "error: no comparable responses\n";
    return failures ? kPrecondition : kBadData;
  }
  return kOk;
}

int cmd_correlate(const RunConfig& cfg, const CorrelateOptions& opt, std::ostream& out, std::ostream& err) {
  const Selector xs = parse_selector(opt.x);
  const Selector ys = parse_selector(opt.y);
  const SlopeTable slopes = slope_table(store::load_verdicts(opt.verdicts));

  std::vector<std::pair<std::string, std::string>> y_keys;
  for (const auto& [key, v] : slopes)
    if (key.first == ys.metric && (ys.entity == "*" || key.second == ys.entity)) y_keys.push_back(key);
  if (y_keys.empty()) {
    err << "error: no verdicts match --y " << ys.label() << "\n";
    return kBadData;
  }
  if (y_keys.size() > 1)
    throw Error(ErrorCode::InvalidArgument, "--y " + ys.label() + " matches more than one entity");
  const auto& y = slopes.at(y_keys.front());

  Table table{{"process", "rho", "p", "n", "x_series", "y_series", "experiments"}, {}};
  std::size_t failures = 0;
  for (const auto& [key, x] : slopes) {
    if (key.first != xs.metric || (xs.entity != "*" && key.second != xs.entity) || key == y_keys.front()) continue;
    std::vector<double> a, b;
    std::vector<std::string> ids;
    for (const auto& [exp, slope] : x) {
      auto it = y.find(exp);
      if (it == y.end()) continue;
      a.push_back(slope);
      b.push_back(it->second);
      ids.push_back(exp);
    }
    try {
      const auto c = groupstats::spearman_correlation(a, b);
      table.rows.push_back({key.second, num(c.rho), num(c.p_value), c.n, key.second + "/" + key.first,
                            y_keys.front().second + "/" + y_keys.front().first, join(ids, ";")});
    } catch (const Error& e) {
      err << "warning: " << key.second << ": " << e.what() << "\n";
      ++failures;
    }
  }
  emit(render(table, report_format(cfg, "csv")), opt.out, out);
  if (table.rows.empty()) {
    err << "error: nothing to correlate\n";
    return failures ? kPrecondition : kBadData;
  }
  return kOk;
}

int cmd_rank(const RunConfig& cfg, const RankOptions& opt, std::ostream& out, std::ostream& err) {
  const auto set = store::load_verdicts(opt.verdicts);
  std::vector<aging::TrendObservation> obs;
  obs.reserve(set.verdicts.size());
  for (const auto& r : set.verdicts)
    obs.push_back({r.experiment, r.entity, r.metric, r.verdict.n, r.verdict.increasing()});

  std::vector<aging::TrendCountRanking> rankings;
  // experiments with an increasing trend per (scope, metric, unit)
  std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> trace;
  if (opt.unit == "process") {
    rankings = aging::count_gc_trends(obs, cfg.min_gc_samples, opt.top ? opt.top : 5);
    for (const auto& o : obs) {
      auto m = aging::gc_ranking_metric(o.metric);
      if (m && o.increasing && o.n >= cfg.min_gc_samples) trace[{"", *m, o.entity}].insert(o.experiment);
    }
  } else if (opt.unit == "task") {
    const aging::TaskGroupRules rules = opt.rules.empty() ? aging::default_task_group_rules()
                                                          : aging::parse_task_group_rules(csv::read_file(opt.rules));
    rankings = aging::rank_task_groups(obs, rules, opt.top ? opt.top : 10);
    for (const auto& o : obs) {
      auto m = aging::task_ranking_metric(o.metric);
      auto t = ingest::parse_task_entity(o.entity);
      if (m && t && o.increasing) trace[{t->process, *m, rules.classify(t->task_name)}].insert(o.experiment);
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "--unit must be 'process' or 'task'");
  }

  Table table{{"unit", "metric", "count", "rank", "scope", "experiments"}, {}};
  for (const auto& r : rankings) {
    for (const auto& e : r.top) {
      const auto& ids = trace[{r.scope, r.metric, e.unit}];
      table.rows.push_back({e.unit, r.metric, num(e.count), e.rank, r.scope,
                            join(std::vector<std::string>(ids.begin(), ids.end()), ";")});
    }
  }
  emit(render(table, report_format(cfg, "csv")), opt.out, out);
  if (obs.empty()) {
    err << "error: no verdicts\n";
    return kBadData;
  }
  return kOk;
}

int cmd_aging_report(const RunConfig& cfg, const AgingReportOptions& opt, std::ostream& out, std::ostream& err) {
  Table table{{"activity", "slope_ms_per_s", "lt_increase_ms", "ttaf_h", "slope_r", "lt_increase_r", "ttaf_r",
               "gain_lt_pct", "gain_ttaf_pct", "gain_lt_rounded", "gain_ttaf_rounded", "experiments"},
              {}};
  std::size_t failures = 0;
  auto add_row = [&](const std::string& activity, double slope_b, const aging::MeasuredDegradation& b,
                     double slope_r, const aging::MeasuredDegradation& r, const std::string& experiments) {
    try {
      const auto g = aging::rejuvenation_gain(b, r);
      table.rows.push_back({activity, num(slope_b), num(b.lt_increase_ms), num(b.ttaf_h), num(slope_r),
                            num(r.lt_increase_ms), num(r.ttaf_h), num(g.gain_lt_pct), num(g.gain_ttaf_pct),
                            g.rounded_lt(), g.rounded_ttaf(), experiments});
    } catch (const Error& e) {
      err << "warning: " << activity << ": " << e.what() << "\n";
      ++failures;
    }
  };

  if (!opt.table.empty()) {
    if (!opt.baseline.empty() || !opt.rejuvenated.empty())
      throw Error(ErrorCode::InvalidArgument, "--table cannot be combined with verdict files");
    const auto lines = csv::split_lines(csv::read_file(opt.table));
    const std::string header = "activity,lt_increase_ms,ttaf_h,lt_increase_r_ms,ttaf_r_h";
    if (lines.empty() || csv::trim(lines.front()) != header)
      throw Error(ErrorCode::BadHeader, opt.table + ": expected header '" + header + "'");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (csv::trim(lines[i]).empty()) continue;
      const auto f = csv::split_row(lines[i]);
      if (f.size() != 5)
        throw Error(ErrorCode::NonNumericField, opt.table + " line " + std::to_string(i + 1) + ": expected 5 fields");
      const aging::MeasuredDegradation b{csv::parse_double(f[1], "lt_increase_ms"), csv::parse_double(f[2], "ttaf_h")};
      const aging::MeasuredDegradation r{csv::parse_double(f[3], "lt_increase_r_ms"),
                                         csv::parse_double(f[4], "ttaf_r_h")};
      add_row(f[0], b.lt_increase_ms / cfg.horizon_s, b, r.lt_increase_ms / cfg.horizon_s, r, "");
    }
  } else {
    if (opt.baseline.empty() || opt.rejuvenated.empty())
      throw Error(ErrorCode::InvalidArgument, "aging-report needs --baseline and --rejuvenated, or --table");
    // entity -> (sum of slopes, experiments)
    auto collect = [&](const std::string& path) {
      std::map<std::string, std::pair<double, std::vector<std::string>>> m;
      for (const auto& r : store::load_verdicts(path).verdicts) {
        if (r.metric != opt.metric || !std::isfinite(r.verdict.slope)) continue;
        auto& e = m[r.entity];
        e.first += r.verdict.slope;
        e.second.push_back(r.experiment);
      }
      return m;
    };
    const auto base = collect(opt.baseline);
    const auto rej = collect(opt.rejuvenated);
    for (const auto& [entity, b] : base) {
      auto it = rej.find(entity);
      if (it == rej.end()) continue;
      const double sb = b.first / static_cast<double>(b.second.size());
      const double sr = it->second.first / static_cast<double>(it->second.second.size());
      const auto pb = aging::project_degradation(sb, cfg.horizon_s, cfg.threshold_ms);
      const auto pr = aging::project_degradation(sr, cfg.horizon_s, cfg.threshold_ms);
      add_row(entity, sb, {pb.lt_increase_ms, pb.ttaf_h()}, sr, {pr.lt_increase_ms, pr.ttaf_h()},
              join(b.second, ";") + "|" + join(it->second.second, ";"));
    }
  }
  emit(render(table, report_format(cfg, "csv")), opt.out, out);
  if (table.rows.empty()) {
    err << "error: no comparable activities\n";
    return failures ? kPrecondition : kBadData;
  }
  return kOk;
}

int cmd_synth(const RunConfig& cfg, const SynthOptions& opt, std::ostream& out, std::ostream& err) {
  synth::CorpusSpec spec = synth::load_corpus_spec(opt.spec);
  if (cfg.seed) spec.seed = *cfg.seed;
  const auto manifest = synth::generate_log_corpus(spec, opt.out_dir, cfg.jobs);
  std::size_t records = 0;
  for (const auto& e : manifest) records += e.record_count();
  out << "experiments," << manifest.size() << "\nrecords," << records << "\n";
  err << "wrote " << (fs::path(opt.out_dir) / "manifest.csv").string() << "\n";
  return kOk;
}

}  // namespace agingscope::cli
