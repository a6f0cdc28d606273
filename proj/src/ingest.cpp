#include "agingscope/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "agingscope/csv.hpp"
#include "agingscope/error.hpp"

namespace agingscope::ingest {

namespace fs = std::filesystem;

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::optional<std::uint64_t> to_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_i64(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

constexpr std::array<int, 12> kDaysBeforeMonth = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};

// `MM-DD HH:MM:SS.mmm` at the start of s; returns seconds and consumed length.
std::optional<std::pair<double, std::size_t>> parse_threadtime_stamp(std::string_view s) {
  constexpr std::string_view shape = "00-00 00:00:00.000";
  if (s.size() < shape.size()) return std::nullopt;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == '0' ? !is_digit(s[i]) : s[i] != shape[i]) return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) v = v * 10 + (s[pos + i] - '0');
    return v;
  };
  const int month = num(0, 2), day = num(3, 2), hh = num(6, 2), mm = num(9, 2), ss = num(12, 2),
            ms = num(15, 3);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  const long long days = kDaysBeforeMonth[month - 1] + (day - 1);
  const long long total_ms = (((days * 24 + hh) * 60 + mm) * 60 + ss) * 1000LL + ms;
  return std::make_pair(static_cast<double>(total_ms) / 1000.0, shape.size());
}

bool is_priority(char c) { return std::string_view("VDIWEFSA").find(c) != std::string_view::npos; }

}  // namespace

// --- logcat envelope -------------------------------------------------------------

LogcatRecord split_logcat_line(std::string_view line) {
  LogcatRecord rec;
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  std::string_view rest = line;

  if (auto stamp = parse_threadtime_stamp(rest)) {
    // threadtime: stamp, pid, tid, priority, tag ": " message
    std::string_view r = ltrim(rest.substr(stamp->second));
    auto take_token = [&]() {
      std::size_t e = r.find_first_of(" \t");
      std::string_view tok = r.substr(0, e);
      r = e == std::string_view::npos ? std::string_view{} : ltrim(r.substr(e));
      return tok;
    };
    auto pid = to_i64(take_token());
    auto tid = to_i64(take_token());
    std::string_view prio = take_token();
    std::size_t colon = r.find(": ");
    if (colon == std::string_view::npos && !r.empty() && r.back() == ':') colon = r.size() - 1;
    if (pid && tid && prio.size() == 1 && is_priority(prio[0]) && colon != std::string_view::npos) {
      rec.timestamp_s = stamp->first;
      rec.pid = *pid;
      rec.priority = prio[0];
      std::string_view tag = r.substr(0, colon);
      while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);
      rec.tag = std::string(tag);
      rec.message = colon + 2 <= r.size() ? std::string(r.substr(colon + 2)) : std::string();
      return rec;
    }
  }

  // brief / tag-only: "P/TAG(PID): msg" or "P/TAG: msg"
  if (rest.size() >= 3 && is_priority(rest[0]) && rest[1] == '/') {
    std::size_t colon = rest.find(": ");
    if (colon == std::string_view::npos && rest.back() == ':') colon = rest.size() - 1;
    if (colon != std::string_view::npos) {
      std::string_view head = rest.substr(2, colon - 2);
      std::optional<std::int64_t> pid;
      if (!head.empty() && head.back() == ')') {
        std::size_t open = head.rfind('(');
        if (open != std::string_view::npos) {
          std::string_view inner = ltrim(head.substr(open + 1, head.size() - open - 2));
          pid = to_i64(inner);
          if (pid) head = head.substr(0, open);
        }
      }
      while (!head.empty() && head.back() == ' ') head.remove_suffix(1);
      if (!head.empty()) {
        rec.priority = rest[0];
        rec.tag = std::string(head);
        rec.pid = pid;
        rec.message = colon + 2 <= rest.size() ? std::string(rest.substr(colon + 2)) : std::string();
        return rec;
      }
    }
  }

  rec.message = std::string(rest);
  return rec;
}

std::string format_logcat_timestamp(double seconds) {
  long long total_ms = std::llround(seconds * 1000.0);
  const int ms = static_cast<int>(total_ms % 1000);
  long long total_s = total_ms / 1000;
  const int ss = static_cast<int>(total_s % 60);
  const int mm = static_cast<int>((total_s / 60) % 60);
  const int hh = static_cast<int>((total_s / 3600) % 24);
  long long day_of_year = (total_s / 86400) % 365;
  int month = 11;
  while (month > 0 && kDaysBeforeMonth[month] > day_of_year) --month;
  const int day = static_cast<int>(day_of_year - kDaysBeforeMonth[month]) + 1;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d-%02d %02d:%02d:%02d.%03d", month + 1, day, hh, mm, ss, ms);
  return buf;
}

// --- launch time -----------------------------------------------------------

std::optional<double> parse_android_duration_ms(std::string_view text) {
  if (text.empty() || text.front() != '+') return std::nullopt;
  text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  // Units in the order they may appear; each at most once.
  constexpr std::array<std::pair<std::string_view, double>, 5> units = {
      {{"d", 86400000.0}, {"h", 3600000.0}, {"m", 60000.0}, {"s", 1000.0}, {"ms", 1.0}}};
  std::size_t next_unit = 0;
  double total = 0.0;
  while (!text.empty()) {
    std::size_t i = 0;
    while (i < text.size() && is_digit(text[i])) ++i;
    if (i == 0) return std::nullopt;
    auto value = to_u64(text.substr(0, i));
    if (!value) return std::nullopt;
    text.remove_prefix(i);
    std::size_t j = 0;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view unit = text.substr(0, j);
    text.remove_prefix(j);
    std::size_t u = next_unit;
    while (u < units.size() && units[u].first != unit) ++u;
    if (u == units.size()) return std::nullopt;
    total += static_cast<double>(*value) * units[u].second;
    next_unit = u + 1;
  }
  return total;
}

std::string format_android_duration(std::int64_t ms) {
  if (ms < 0) throw Error(ErrorCode::InvalidArgument, "negative duration");
  std::string out = "+";
  const std::int64_t h = ms / 3600000, m = (ms / 60000) % 60, s = (ms / 1000) % 60, r = ms % 1000;
  char buf[16];
  bool printed = false;
  if (h > 0) {
    out += std::to_string(h) + "h";
    printed = true;
  }
  if (printed || m > 0) {
    std::snprintf(buf, sizeof buf, printed ? "%02lldm" : "%lldm", static_cast<long long>(m));
    out += buf;
    printed = true;
  }
  if (printed || s > 0) {
    std::snprintf(buf, sizeof buf, printed ? "%02llds" : "%llds", static_cast<long long>(s));
    out += buf;
    printed = true;
  }
  std::snprintf(buf, sizeof buf, printed ? "%03lldms" : "%lldms", static_cast<long long>(r));
  out += buf;
  return out;
}

namespace {

std::optional<LaunchEvent> displayed_from_message(std::string_view msg, double t) {
  constexpr std::string_view key = "Displayed ";
  std::size_t pos = msg.find(key);
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = msg.substr(pos + key.size());
  std::size_t sep = rest.find(": +");
  if (sep == std::string_view::npos) return std::nullopt;
  std::string_view component = rest.substr(0, sep);
  if (component.empty() || component.find_first_of(" \t") != std::string_view::npos) return std::nullopt;
  std::string_view dur = rest.substr(sep + 2);
  std::size_t end = dur.find_first_of(" \t");
  dur = dur.substr(0, end);
  auto ms = parse_android_duration_ms(dur);
  if (!ms) throw Error(ErrorCode::MalformedDuration, "cannot parse launch duration '" + std::string(dur) + "'");
  return LaunchEvent{t, std::string(component), *ms};
}

}  // namespace

std::optional<LaunchEvent> parse_displayed_line(std::string_view line, double t) {
  LogcatRecord rec = split_logcat_line(line);
  return displayed_from_message(rec.message, rec.timestamp_s.value_or(t));
}

// --- garbage collection ------------------------------------------------------

GcCause parse_gc_cause(std::string_view word) {
  if (word == "Explicit") return {GcCauseKind::Explicit, "Explicit"};
  if (word == "Background") return {GcCauseKind::Background, "Background"};
  if (word == "Concurrent") return {GcCauseKind::Concurrent, "Concurrent"};
  return {GcCauseKind::Other, std::string(word)};
}

std::string cause_key(const GcCause& c) {
  std::string k;
  for (char ch : c.name) k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return k;
}

double GcEvent::pause_total_ms() const {
  double s = 0.0;
  for (double p : pause_ms) s += p;
  return s;
}

namespace {

std::optional<std::uint64_t> parse_size_bytes(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_digit(s[i])) ++i;
  auto v = to_u64(s.substr(0, i));
  if (!v) return std::nullopt;
  std::string_view unit = s.substr(i);
  std::uint64_t mult = 0;
  if (unit == "B") mult = 1;
  else if (unit == "KB") mult = 1024ULL;
  else if (unit == "MB") mult = 1024ULL * 1024;
  else if (unit == "GB") mult = 1024ULL * 1024 * 1024;
  else return std::nullopt;
  return *v * mult;
}

std::optional<double> parse_time_ms(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (is_digit(s[i]) || s[i] == '.')) ++i;
  auto v = to_double(s.substr(0, i));
  if (!v) return std::nullopt;
  std::string_view unit = s.substr(i);
  if (unit == "ms") return *v;
  if (unit == "us") return *v / 1000.0;
  if (unit == "ns") return *v / 1e6;
  if (unit == "s") return *v * 1000.0;
  return std::nullopt;
}

// "<count>(<size>)"
bool parse_count_size(std::string_view& s, std::uint64_t& count, std::uint64_t& bytes) {
  std::size_t open = s.find('(');
  std::size_t close = s.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return false;
  auto c = to_u64(s.substr(0, open));
  auto b = parse_size_bytes(s.substr(open + 1, close - open - 1));
  if (!c || !b) return false;
  count = *c;
  bytes = *b;
  s.remove_prefix(close + 1);
  return true;
}

bool consume(std::string_view& s, std::string_view lit) {
  if (s.substr(0, lit.size()) != lit) return false;
  s.remove_prefix(lit.size());
  return true;
}

std::optional<GcEvent> gc_from_message(std::string_view msg, double t, std::string_view process) {
  constexpr std::string_view key = " GC freed ";
  std::size_t pos = msg.find(key);
  if (pos == std::string_view::npos) return std::nullopt;
  auto malformed = [&](const char* why) {
    return Error(ErrorCode::MalformedGcLine, std::string(why) + " in '" + std::string(msg) + "'");
  };
  std::string_view head = msg.substr(0, pos);
  std::size_t sp = head.find(' ');
  GcEvent e;
  e.t = t;
  e.process = std::string(process);
  e.cause = parse_gc_cause(head.substr(0, sp));
  if (e.cause.name.empty()) throw malformed("missing GC cause");
  e.algorithm = sp == std::string_view::npos ? std::string() : std::string(head.substr(sp + 1));

  std::string_view s = msg.substr(pos + key.size());
  if (!parse_count_size(s, e.freed_objects, e.freed_bytes)) throw malformed("bad AllocSpace counts");
  if (!consume(s, " AllocSpace objects, ")) throw malformed("missing AllocSpace objects");
  if (!parse_count_size(s, e.los_objects, e.los_bytes)) throw malformed("bad LOS counts");
  if (!consume(s, " LOS objects, ")) throw malformed("missing LOS objects");
  std::size_t pct = s.find("% free");
  if (pct == std::string_view::npos || pct == 0 || !to_double(s.substr(0, pct))) throw malformed("missing % free");
  std::size_t paused = s.find("paused ", pct);
  if (paused == std::string_view::npos) throw malformed("missing pause section");
  s.remove_prefix(paused + 7);
  std::size_t total = s.find(" total ");
  if (total == std::string_view::npos) throw malformed("missing total");
  std::string_view pauses = s.substr(0, total);
  std::string_view total_text = s.substr(total + 7);
  total_text = total_text.substr(0, total_text.find_first_of(" \t"));
  while (!pauses.empty()) {
    std::size_t comma = pauses.find(',');
    auto p = parse_time_ms(pauses.substr(0, comma));
    if (!p) throw malformed("bad pause time");
    e.pause_ms.push_back(*p);
    pauses = comma == std::string_view::npos ? std::string_view{} : pauses.substr(comma + 1);
  }
  if (e.pause_ms.empty()) throw malformed("no pause times");
  auto tot = parse_time_ms(total_text);
  if (!tot) throw malformed("bad total time");
  e.total_ms = *tot;
  if (e.total_ms < *std::max_element(e.pause_ms.begin(), e.pause_ms.end()))
    throw malformed("total shorter than a pause");
  return e;
}

bool is_art_record(const LogcatRecord& rec) { return rec.tag.empty() || rec.tag == "art"; }

}  // namespace

std::optional<GcEvent> parse_gc_line(std::string_view line, double t, std::string_view process) {
  LogcatRecord rec = split_logcat_line(line);
  if (!is_art_record(rec)) return std::nullopt;
  return gc_from_message(rec.message, rec.timestamp_s.value_or(t), process);
}

std::string format_size(std::uint64_t bytes) {
  if (bytes == 0) return "0B";
  constexpr std::array<std::pair<std::uint64_t, const char*>, 3> units = {
      {{1024ULL * 1024 * 1024, "GB"}, {1024ULL * 1024, "MB"}, {1024ULL, "KB"}}};
  for (const auto& [mult, name] : units)
    if (bytes % mult == 0) return std::to_string(bytes / mult) + name;
  return std::to_string(bytes) + "B";
}

namespace {

std::string format_ms(double ms) {
  char buf[64];
  double scaled = ms * 1000.0;
  if (std::fabs(scaled - std::round(scaled)) < 1e-6 * std::max(1.0, std::fabs(scaled))) {
    std::snprintf(buf, sizeof buf, "%.3fms", ms);
    return buf;
  }
  return csv::format_double(ms) + "ms";
}

}  // namespace

std::string format_gc_message(const GcEvent& e) {
  std::string out = e.cause.name;
  if (!e.algorithm.empty()) out += " " + e.algorithm;
  out += " GC freed " + std::to_string(e.freed_objects) + "(" + format_size(e.freed_bytes) +
         ") AllocSpace objects, " + std::to_string(e.los_objects) + "(" + format_size(e.los_bytes) +
         ") LOS objects, 40% free, 12MB/20MB, paused ";
  for (std::size_t i = 0; i < e.pause_ms.size(); ++i) {
    if (i) out += ",";
    out += format_ms(e.pause_ms[i]);
  }
  out += " total " + format_ms(e.total_ms);
  return out;
}

// --- PSS ----------------------------------------------------------------------

namespace {

void check_header(std::string_view line, std::string_view expected, std::string_view file) {
  auto got = csv::split_row(line);
  auto want = csv::split_row(expected);
  bool ok = got.size() == want.size();
  for (std::size_t i = 0; ok && i < got.size(); ++i) ok = csv::trim(got[i]) == want[i];
  if (!ok) throw Error(ErrorCode::BadHeader, std::string(file) + ": expected header '" + std::string(expected) + "'");
}

template <typename Row>
void stable_sort_by_time(std::vector<Row>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
}

}  // namespace

std::vector<PssSample> parse_pss_csv(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::vector<PssSample> out;
  std::size_t i = 0;
  while (i < lines.size() && csv::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw Error(ErrorCode::BadHeader, "pss.csv: missing header");
  check_header(lines[i], "t_s,process,pid,pss_kb", "pss.csv");
  for (++i; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    auto f = csv::split_row(lines[i]);
    if (f.size() != 4)
      throw Error(ErrorCode::NonNumericField, "pss.csv line " + std::to_string(i + 1) + ": expected 4 fields");
    PssSample s;
    s.t = csv::parse_double(f[0], "t_s");
    s.process = csv::trim(f[1]);
    s.pid = csv::parse_int(f[2], "pid");
    s.pss_kb = csv::parse_double(f[3], "pss_kb");
    if (s.t < 0.0 || s.pss_kb < 0.0)
      throw Error(ErrorCode::NonNumericField, "pss.csv line " + std::to_string(i + 1) + ": negative value");
    out.push_back(std::move(s));
  }
  stable_sort_by_time(out);
  return out;
}

std::string format_pss_csv(std::span<const PssSample> rows) {
  std::string out = "t_s,process,pid,pss_kb\n";
  for (const auto& r : rows)
    out += csv::join_row({csv::format_double(r.t), r.process, std::to_string(r.pid), csv::format_double(r.pss_kb)}) +
           "\n";
  return out;
}

std::vector<PssSample> parse_dumpsys_meminfo(std::string_view text, double t) {
  std::vector<PssSample> out;
  bool in_section = false;
  for (const std::string& raw : csv::split_lines(text)) {
    std::string line = csv::trim(raw);
    if (!in_section) {
      in_section = line.rfind("Total PSS by process", 0) == 0;
      continue;
    }
    if (line.empty()) {
      if (!out.empty()) break;
      continue;
    }
    if (line.rfind("Total PSS by", 0) == 0) break;
    // "151,000K: system (pid 1097)" or "151000 kB: system (pid 1097 / activities)"
    std::size_t colon = line.find(':');
    std::size_t pidpos = line.find("(pid ");
    if (colon == std::string::npos || pidpos == std::string::npos || pidpos < colon) continue;
    std::string amount;
    for (char c : line.substr(0, colon))
      if (is_digit(c)) amount.push_back(c);
    if (amount.empty()) continue;
    std::string name = csv::trim(line.substr(colon + 1, pidpos - colon - 1));
    std::string pid_text;
    for (std::size_t k = pidpos + 5; k < line.size() && is_digit(line[k]); ++k) pid_text.push_back(line[k]);
    auto kb = to_double(amount);
    auto pid = to_i64(pid_text);
    if (!kb || !pid || name.empty()) continue;
    out.push_back({t, name, *pid, *kb});
  }
  return out;
}

// --- tasks ------------------------------------------------------------------

TaskSample parse_task_stat_line(std::string_view line, double t) {
  auto malformed = [&](const char* why) {
    return Error(ErrorCode::MalformedStatLine, std::string(why) + " in '" + std::string(line) + "'");
  };
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  std::size_t open = line.find('(');
  std::size_t close = line.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw malformed("missing comm");
  auto id = to_i64(csv::trim(line.substr(0, open)));
  if (!id || *id < 0) throw malformed("bad task id");
  TaskSample s;
  s.t = t;
  s.tid = *id;
  s.pid = *id;
  s.task_name = std::string(line.substr(open + 1, close - open - 1));

  std::vector<std::string_view> fields;
  std::string_view rest = line.substr(close + 1);
  while (true) {
    rest = ltrim(rest);
    if (rest.empty()) break;
    std::size_t e = rest.find_first_of(" \t");
    fields.push_back(rest.substr(0, e));
    if (e == std::string_view::npos) break;
    rest = rest.substr(e);
  }
  // fields[0] is field 3 (state); field k lives at index k - 3.
  if (fields.size() < 13) throw malformed("too few fields");
  auto field = [&](std::size_t k) {
    auto v = to_u64(fields[k - 3]);
    if (!v) throw malformed("non-numeric counter");
    return *v;
  };
  s.minflt = field(10);
  s.majflt = field(12);
  s.utime_ticks = field(14);
  s.stime_ticks = field(15);
  return s;
}

std::string format_task_stat_line(const TaskSample& s) {
  // Fields 1..44 of /proc/<pid>/task/<tid>/stat; counters not modelled are zero.
  std::string out = std::to_string(s.tid) + " (" + s.task_name + ") S 1 " + std::to_string(s.pid) + " 0 0 -1 " +
                    "4194624 " + std::to_string(s.minflt) + " 0 " + std::to_string(s.majflt) + " 0 " +
                    std::to_string(s.utime_ticks) + " " + std::to_string(s.stime_ticks) +
                    " 0 0 20 0 1 0 0 0 0 18446744073709551615 0 0 0 0 0 0 0 0 0 0 0 0 17 0 0 0 0";
  return out;
}

std::vector<TaskSample> parse_tasks_csv(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::vector<TaskSample> out;
  std::size_t i = 0;
  while (i < lines.size() && csv::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw Error(ErrorCode::BadHeader, "tasks.csv: missing header");
  check_header(lines[i], "t_s,pid,tid,stat_line", "tasks.csv");
  for (++i; i < lines.size(); ++i) {
    std::string_view row = lines[i];
    if (csv::trim(row).empty()) continue;
    std::array<std::string_view, 3> head;
    for (auto& h : head) {
      std::size_t comma = row.find(',');
      if (comma == std::string_view::npos)
        throw Error(ErrorCode::MalformedStatLine, "tasks.csv line " + std::to_string(i + 1) + ": too few fields");
      h = row.substr(0, comma);
      row.remove_prefix(comma + 1);
    }
    std::string stat = csv::trim(row);
    if (stat.size() >= 2 && stat.front() == '"' && stat.back() == '"') {
      auto unq = csv::split_row(stat);
      stat = unq.empty() ? std::string() : unq.front();
    }
    TaskSample s = parse_task_stat_line(stat, csv::parse_double(head[0], "t_s"));
    s.pid = csv::parse_int(head[1], "pid");
    const long long tid = csv::parse_int(head[2], "tid");
    if (tid != s.tid)
      throw Error(ErrorCode::MalformedStatLine, "tasks.csv line " + std::to_string(i + 1) + ": tid column disagrees");
    out.push_back(std::move(s));
  }
  stable_sort_by_time(out);
  return out;
}

std::string format_tasks_csv(std::span<const TaskSample> rows) {
  std::string out = "t_s,pid,tid,stat_line\n";
  for (const auto& r : rows)
    out += csv::format_double(r.t) + "," + std::to_string(r.pid) + "," + std::to_string(r.tid) + "," +
           format_task_stat_line(r) + "\n";
  return out;
}

// --- series assembly ---------------------------------------------------------

std::string task_entity(std::string_view process, std::int64_t tid, std::string_view task_name) {
  return std::string(process) + "|" + std::to_string(tid) + "|" + std::string(task_name);
}

std::optional<TaskEntity> parse_task_entity(std::string_view entity) {
  std::size_t a = entity.find('|');
  if (a == std::string_view::npos) return std::nullopt;
  std::size_t b = entity.find('|', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  auto tid = to_i64(entity.substr(a + 1, b - a - 1));
  if (!tid) return std::nullopt;
  return TaskEntity{std::string(entity.substr(0, a)), *tid, std::string(entity.substr(b + 1))};
}

std::string gc_metric_name(std::string_view base, const GcCause& cause) {
  return std::string(base) + "." + cause_key(cause);
}

namespace {

struct SeriesKey {
  std::string entity;
  std::string metric;
  auto operator<=>(const SeriesKey&) const = default;
};

struct SeriesBuilder {
  std::map<SeriesKey, model::MetricSeries> series;

  void add(const std::string& entity, std::string_view metric, std::string_view unit, model::SeriesKind kind,
           double t, double value) {
    auto [it, fresh] = series.try_emplace(SeriesKey{entity, std::string(metric)});
    if (fresh) {
      it->second.entity = entity;
      it->second.metric = std::string(metric);
      it->second.unit = std::string(unit);
      it->second.kind = kind;
    }
    it->second.samples.push_back({t, value, false});
  }

  std::vector<model::MetricSeries> finish() {
    std::vector<model::MetricSeries> out;
    for (auto& [key, s] : series) {
      std::stable_sort(s.samples.begin(), s.samples.end(),
                       [](const model::Sample& a, const model::Sample& b) { return a.t < b.t; });
      for (std::size_t i = 1; i < s.samples.size(); ++i) {
        if (s.samples[i].t <= s.samples[i - 1].t) {
          s.samples[i].t = s.samples[i - 1].t + 0.001;
          s.samples[i].flagged = true;
        }
      }
      out.push_back(std::move(s));
    }
    return out;
  }
};

}  // namespace

std::vector<model::MetricSeries> build_series(std::span<const LaunchEvent> events) {
  SeriesBuilder pooled, per_activity;
  for (const auto& e : events) {
    pooled.add(std::string(kPooledActivities), kLaunchMetric, "ms", model::SeriesKind::Instantaneous, e.t,
               e.launch_time_ms);
    per_activity.add(e.activity, kLaunchMetric, "ms", model::SeriesKind::Instantaneous, e.t, e.launch_time_ms);
  }
  auto out = pooled.finish();
  auto rest = per_activity.finish();
  out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
  return out;
}

std::vector<model::MetricSeries> build_series(std::span<const GcEvent> events) {
  SeriesBuilder b;
  for (const auto& e : events) {
    b.add(e.process, gc_metric_name(kGcTotalMetric, e.cause), "ms", model::SeriesKind::Instantaneous, e.t,
          e.total_ms);
    b.add(e.process, gc_metric_name(kGcPauseMetric, e.cause), "ms", model::SeriesKind::Instantaneous, e.t,
          e.pause_total_ms());
  }
  return b.finish();
}

std::vector<model::MetricSeries> build_series(std::span<const PssSample> samples) {
  SeriesBuilder b;
  for (const auto& s : samples) b.add(s.process, kPssMetric, "kB", model::SeriesKind::Instantaneous, s.t, s.pss_kb);
  return b.finish();
}

std::vector<model::MetricSeries> build_series(std::span<const TaskSample> samples) {
  SeriesBuilder b;
  for (const auto& s : samples) {
    const std::string entity =
        task_entity(s.process.empty() ? "pid" + std::to_string(s.pid) : s.process, s.tid, s.task_name);
    const auto kind = model::SeriesKind::Cumulative;
    b.add(entity, "minflt", "faults", kind, s.t, static_cast<double>(s.minflt));
    b.add(entity, "majflt", "faults", kind, s.t, static_cast<double>(s.majflt));
    b.add(entity, "utime_ticks", "ticks", kind, s.t, static_cast<double>(s.utime_ticks));
    b.add(entity, "stime_ticks", "ticks", kind, s.t, static_cast<double>(s.stime_ticks));
  }
  return b.finish();
}

// --- experiment directories --------------------------------------------------

void parse_logcat_text(std::string_view text, const LogcatOptions& options, const std::string& file_label,
                       ExperimentCapture& out) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x80 || (u < 0x20 && c != '\n' && c != '\r' && c != '\t')) {
      ++out.skipped_bytes;
      continue;
    }
    clean.push_back(c);
  }
  const auto lines = csv::split_lines(clean);
  std::vector<LogcatRecord> records;
  records.reserve(lines.size());
  double origin = std::numeric_limits<double>::infinity();
  for (const auto& line : lines) {
    records.push_back(split_logcat_line(line));
    if (records.back().timestamp_s) origin = std::min(origin, *records.back().timestamp_s);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LogcatRecord& rec = records[i];
    const double t = rec.timestamp_s ? *rec.timestamp_s - origin
                                     : static_cast<double>(i) * options.line_interval_s;
    try {
      if (auto launch = displayed_from_message(rec.message, t)) {
        out.launches.push_back(std::move(*launch));
        continue;
      }
      if (!is_art_record(rec)) continue;
      std::string process = options.default_process;
      if (rec.pid) {
        auto it = options.process_names.find(*rec.pid);
        process = it != options.process_names.end() ? it->second : "pid" + std::to_string(*rec.pid);
      }
      if (auto gc = gc_from_message(rec.message, t, process)) out.gcs.push_back(std::move(*gc));
    } catch (const Error& e) {
      out.errors.push_back({file_label, i + 1, e.what()});
    }
  }
}

ExperimentCapture ingest_experiment_dir(const std::string& dir, const LogcatOptions& options) {
  ExperimentCapture cap;
  cap.experiment_id = fs::path(dir).filename().string();
  if (cap.experiment_id.empty()) cap.experiment_id = fs::path(dir).parent_path().filename().string();
  LogcatOptions opts = options;

  const fs::path pss_path = fs::path(dir) / "pss.csv";
  if (fs::exists(pss_path)) {
    try {
      cap.pss = parse_pss_csv(csv::read_file(pss_path.string()));
      for (const auto& s : cap.pss) opts.process_names.emplace(s.pid, s.process);
    } catch (const Error& e) {
      cap.errors.push_back({pss_path.string(), 0, e.what()});
    }
  }
  const fs::path tasks_path = fs::path(dir) / "tasks.csv";
  if (fs::exists(tasks_path)) {
    try {
      cap.tasks = parse_tasks_csv(csv::read_file(tasks_path.string()));
      for (auto& s : cap.tasks) {
        auto it = opts.process_names.find(s.pid);
        if (it != opts.process_names.end()) s.process = it->second;
      }
    } catch (const Error& e) {
      cap.errors.push_back({tasks_path.string(), 0, e.what()});
    }
  }
  const fs::path logcat_path = fs::path(dir) / "logcat.txt";
  if (fs::exists(logcat_path))
    parse_logcat_text(csv::read_file(logcat_path.string()), opts, logcat_path.string(), cap);
  return cap;
}

std::vector<model::MetricSeries> build_experiment_series(const ExperimentCapture& capture) {
  std::vector<model::MetricSeries> out;
  auto append = [&](std::vector<model::MetricSeries> v) {
    out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  };
  append(build_series(std::span<const LaunchEvent>(capture.launches)));
  append(build_series(std::span<const GcEvent>(capture.gcs)));
  append(build_series(std::span<const PssSample>(capture.pss)));
  append(build_series(std::span<const TaskSample>(capture.tasks)));
  return out;
}

}  // namespace agingscope::ingest
