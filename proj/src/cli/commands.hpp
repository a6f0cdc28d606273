#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "agingscope/cli.hpp"

namespace agingscope::cli {

struct IngestOptions {
  std::vector<std::string> inputs;
  std::string out_dir;
  double line_interval_s = 1.0;
};

struct DetectOptions {
  std::vector<std::string> inputs;  // store files or directories
  std::string out;                  // empty: stdout
};

struct CompareOptions {
  std::string verdicts;
  std::string plan;  // empty: bundled 72-experiment plan
  std::string factor;
  std::vector<std::string> responses;  // METRIC@ENTITY selectors; empty: all
  std::vector<std::string> where;      // FACTOR=LEVEL filters
  std::string out;
};

struct CorrelateOptions {
  std::string verdicts;
  std::string x;  // METRIC@ENTITY, entity may be '*'
  std::string y;
  std::string out;
};

struct RankOptions {
  std::string verdicts;
  std::string unit = "process";  // process | task
  std::string rules;             // task group rules CSV; empty: built-in
  std::size_t top = 0;           // 0: 5 for processes, 10 for task groups
  std::string out;
};

struct AgingReportOptions {
  std::string baseline;     // verdict file
  std::string rejuvenated;  // verdict file
  std::string table;        // measured Table-6 style CSV instead of verdicts
  std::string metric = "launch_time_ms";
  std::string out;
};

struct SynthOptions {
  std::string spec;
  std::string out_dir;
};

int cmd_ingest(const RunConfig& cfg, const IngestOptions& opt, std::ostream& out, std::ostream& err);
int cmd_detect(const RunConfig& cfg, const DetectOptions& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& cfg, const CompareOptions& opt, std::ostream& out, std::ostream& err);
int cmd_correlate(const RunConfig& cfg, const CorrelateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_rank(const RunConfig& cfg, const RankOptions& opt, std::ostream& out, std::ostream& err);
int cmd_aging_report(const RunConfig& cfg, const AgingReportOptions& opt, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, const SynthOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace agingscope::cli
