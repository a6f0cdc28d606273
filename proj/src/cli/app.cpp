#include <iostream>

#include <CLI11.hpp>

#include "agingscope/cli.hpp"
#include "commands.hpp"

namespace agingscope::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Software aging analysis for Android telemetry", "agingscope"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::uint64_t seed = 0;
  app.add_option("--alpha", cfg.alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--horizon-s", cfg.horizon_s, "Projection horizon in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--threshold-ms", cfg.threshold_ms, "Launch-time degradation threshold")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--min-gc-samples", cfg.min_gc_samples, "Minimum GC series length to rank")->capture_default_str();
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override the synthetic corpus seed");

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse captures into per-experiment series stores");
  c_ingest->add_option("inputs", ingest.inputs, "Experiment dirs, corpus roots or logcat files")->required();
  c_ingest->add_option("-o,--out", ingest.out_dir, "Output directory")->required();
  c_ingest->add_option("--line-interval-s", ingest.line_interval_s, "Time step for lines without timestamps");

  DetectOptions detect;
  auto* c_detect = app.add_subcommand("detect", "Run the trend battery on every stored series");
  c_detect->add_option("inputs", detect.inputs, "Series store files or directories")->required();
  c_detect->add_option("-o,--out", detect.out, "Verdict file (default stdout)");

  CompareOptions compare;
  auto* c_compare = app.add_subcommand("compare", "Factor analysis of trend slopes across experiments");
  c_compare->add_option("verdicts", compare.verdicts, "Verdict file")->required();
  c_compare->add_option("--factor", compare.factor, "DEV, VER, APP, EVENTS or STO")->required();
  c_compare->add_option("--plan", compare.plan, "Experiment plan CSV (default: bundled 72-experiment plan)");
  c_compare->add_option("--response", compare.responses, "METRIC@ENTITY to compare (repeatable)");
  c_compare->add_option("--where", compare.where, "Restrict the plan, FACTOR=LEVEL (repeatable)");
  c_compare->add_option("-o,--out", compare.out, "Report file (default stdout)");

  CorrelateOptions correlate;
  auto* c_corr = app.add_subcommand("correlate", "Spearman correlation between slope vectors");
  c_corr->add_option("verdicts", correlate.verdicts, "Verdict file")->required();
  c_corr->add_option("--x", correlate.x, "METRIC@ENTITY, ENTITY may be *")->required();
  c_corr->add_option("--y", correlate.y, "METRIC@ENTITY")->required();
  c_corr->add_option("-o,--out", correlate.out, "Report file (default stdout)");

  RankOptions rank;
  auto* c_rank = app.add_subcommand("rank", "Rank processes or task groups by trend counts");
  c_rank->add_option("verdicts", rank.verdicts, "Verdict file")->required();
  c_rank->add_option("--unit", rank.unit, "process or task")->check(CLI::IsMember({"process", "task"}));
  c_rank->add_option("--rules", rank.rules, "Task group rules CSV (group,pattern)");
  c_rank->add_option("--top", rank.top, "Entries per ranking");
  c_rank->add_option("-o,--out", rank.out, "Report file (default stdout)");

  AgingReportOptions report;
  auto* c_report = app.add_subcommand("aging-report", "Degradation, TTAF and rejuvenation gains");
  c_report->add_option("--baseline", report.baseline, "Verdicts without rejuvenation");
  c_report->add_option("--rejuvenated", report.rejuvenated, "Verdicts with rejuvenation");
  c_report->add_option("--table", report.table,
                       "Measured rows: activity,lt_increase_ms,ttaf_h,lt_increase_r_ms,ttaf_r_h");
  c_report->add_option("--metric", report.metric, "Launch-time metric name")->capture_default_str();
  c_report->add_option("-o,--out", report.out, "Report file (default stdout)");

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic capture corpus");
  c_synth->add_option("--spec", synth.spec, "Corpus spec file")->required();
  c_synth->add_option("-o,--out", synth.out_dir, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (*seed_opt) cfg.seed = seed;

  try {
    if (*c_ingest) return cmd_ingest(cfg, ingest, out, err);
    if (*c_detect) return cmd_detect(cfg, detect, out, err);
    if (*c_compare) return cmd_compare(cfg, compare, out, err);
    if (*c_corr) return cmd_correlate(cfg, correlate, out, err);
    if (*c_rank) return cmd_rank(cfg, rank, out, err);
    if (*c_report) return cmd_aging_report(cfg, report, out, err);
    if (*c_synth) return cmd_synth(cfg, synth, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadData;
  }
  return kUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace agingscope::cli
