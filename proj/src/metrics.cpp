#include "womv/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "womv/error.hpp"

namespace womv::metrics {

using nlohmann::json;

namespace {

Micros nearest_rank(const std::vector<Micros>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

json percentiles_json(const std::optional<Percentiles>& p) {
  if (!p) return nullptr;
  return json{{"p50", p->p50}, {"p95", p->p95}, {"p99", p->p99}};
}

std::optional<Percentiles> percentiles_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Percentiles{j.at("p50").get<Micros>(), j.at("p95").get<Micros>(),
                     j.at("p99").get<Micros>()};
}

std::string opt_field(const std::optional<Percentiles>& p, Micros Percentiles::*field) {
  return p ? std::to_string((*p).*field) : std::string();
}

}  // namespace

std::optional<Percentiles> percentiles(std::vector<Micros> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  return Percentiles{nearest_rank(values, 50), nearest_rank(values, 95), nearest_rank(values, 99)};
}

RunReport finalize(const ftl::Ftl& ftl, std::vector<Micros> read_latencies,
                   std::vector<Micros> write_latencies) {
  const ftl::FtlStats& s = ftl.metrics_snapshot();
  const device::Device& dev = ftl.device();
  RunReport r;
  r.mode = ftl.config().mode.name();
  r.label = r.mode;
  r.total_eus = dev.geometry().num_eus();
  r.page_size_bytes = dev.geometry().page_size_bytes;
  r.group_size = ftl.group_size();
  r.user_pages_written = s.user_pages_written;
  r.user_bytes_written = s.user_bytes_written;
  r.device_page_programs = s.device_page_programs;
  r.device_bytes_written = s.device_bytes_written;
  r.device_reads_charged = s.device_reads_charged();
  r.write_path_reads = s.write_path_reads;
  r.gc_reads = s.gc_reads;
  r.user_reads = s.user_reads;
  r.eus_erased = s.eus_erased;
  r.eus_reopened = s.eus_reopened;
  r.relocations = s.relocations;
  r.gc_steps = s.gc_steps;
  r.padding_slots = s.padding_slots;
  r.patched_cells = s.patched_cells;
  r.makespan_us = dev.makespan();
  r.write_amplification =
      s.user_bytes_written == 0
          ? 0.0
          : static_cast<double>(s.device_bytes_written) / static_cast<double>(s.user_bytes_written);
  r.read_latency = percentiles(std::move(read_latencies));
  r.write_latency = percentiles(std::move(write_latencies));
  r.erase_histogram = dev.stats().erases_per_eu;
  r.max_eu_erases = r.erase_histogram.empty()
                        ? 0
                        : *std::max_element(r.erase_histogram.begin(), r.erase_histogram.end());
  return r;
}

// ---------------------------------------------------------------------------

std::optional<double> endurance_bytes(const RunReport& report, const EnduranceModel& model) {
  if (report.eus_erased == 0) return std::nullopt;
  return static_cast<double>(model.pe_limit) * static_cast<double>(report.total_eus) *
         static_cast<double>(report.user_bytes_written) / static_cast<double>(report.eus_erased);
}

std::string EnduranceRatio::to_string() const {
  switch (status) {
    case Status::Finite: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", value);
      return buf;
    }
    case Status::Infinite: return "inf";
    case Status::Undefined: return "undefined";
  }
  return "undefined";
}

EnduranceRatio endurance_ratio(const RunReport& a, const EnduranceModel& model_a,
                               const RunReport& b, const EnduranceModel& model_b) {
  const auto ea = endurance_bytes(a, model_a);
  const auto eb = endurance_bytes(b, model_b);
  if (!eb) return {EnduranceRatio::Status::Undefined, 0.0};
  if (!ea) return {EnduranceRatio::Status::Infinite, 0.0};
  return {EnduranceRatio::Status::Finite, *ea / *eb};
}

// ---------------------------------------------------------------------------

Comparison compare(const std::vector<RunReport>& reports, const std::string& baseline) {
  const auto base = std::find_if(reports.begin(), reports.end(),
                                 [&](const RunReport& r) { return r.label == baseline; });
  if (base == reports.end()) {
    throw Error(ErrorCode::ConfigError, "no report labelled '" + baseline + "' to compare against");
  }
  Comparison cmp;
  cmp.baseline = baseline;
  for (const RunReport& r : reports) {
    ComparisonRow row;
    row.label = r.label;
    row.eus_erased = r.eus_erased;
    if (base->eus_erased > 0) {
      row.erase_reduction_pct = 100.0 * (static_cast<double>(base->eus_erased) -
                                         static_cast<double>(r.eus_erased)) /
                                static_cast<double>(base->eus_erased);
    } else if (r.eus_erased == 0) {
      row.erase_reduction_pct = 0.0;
    }
    row.makespan_us = r.makespan_us;
    if (base->makespan_us > 0) {
      row.makespan_delta_pct = 100.0 * (static_cast<double>(r.makespan_us) -
                                        static_cast<double>(base->makespan_us)) /
                               static_cast<double>(base->makespan_us);
    }
    row.write_amplification = r.write_amplification;
    row.device_reads_charged = r.device_reads_charged;
    if (r.read_latency) row.read_p95_us = r.read_latency->p95;
    cmp.rows.push_back(row);
  }
  return cmp;
}

std::string reduction_text(const std::optional<double>& pct) {
  if (!pct) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.1f%% reduction", *pct);
  return buf;
}

void print_comparison(std::ostream& out, const Comparison& cmp) {
  out << "baseline: " << cmp.baseline << '\n';
  out << std::left << std::setw(26) << "mode" << std::right << std::setw(10) << "erases"
      << std::setw(20) << "vs baseline" << std::setw(14) << "makespan_s" << std::setw(10)
      << "time" << std::setw(8) << "WA" << std::setw(12) << "reads" << std::setw(10)
      << "rd_p95" << '\n';
  for (const ComparisonRow& row : cmp.rows) {
    char makespan[32];
    std::snprintf(makespan, sizeof makespan, "%.3f", static_cast<double>(row.makespan_us) / 1e6);
    char delta[32] = "n/a";
    if (row.makespan_delta_pct) std::snprintf(delta, sizeof delta, "%+.1f%%", *row.makespan_delta_pct);
    char wa[32];
    std::snprintf(wa, sizeof wa, "%.2f", row.write_amplification);
    out << std::left << std::setw(26) << row.label << std::right << std::setw(10)
        << row.eus_erased << std::setw(20) << reduction_text(row.erase_reduction_pct)
        << std::setw(14) << makespan << std::setw(10) << delta << std::setw(8) << wa
        << std::setw(12) << row.device_reads_charged << std::setw(10)
        << (row.read_p95_us ? std::to_string(*row.read_p95_us) : std::string("-")) << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "label,eus_erased,erase_reduction_pct,makespan_us,makespan_delta_pct,"
         "write_amplification,device_reads_charged,read_p95_us\n";
  for (const ComparisonRow& row : cmp.rows) {
    out << quote(row.label) << ',' << row.eus_erased << ','
        << (row.erase_reduction_pct ? format_double(*row.erase_reduction_pct) : "") << ','
        << row.makespan_us << ','
        << (row.makespan_delta_pct ? format_double(*row.makespan_delta_pct) : "") << ','
        << format_double(row.write_amplification) << ',' << row.device_reads_charged << ','
        << (row.read_p95_us ? std::to_string(*row.read_p95_us) : "") << '\n';
  }
}

// ---------------------------------------------------------------------------

Format parse_format(const std::string& text) {
  if (text == "json") return Format::Json;
  if (text == "csv") return Format::Csv;
  throw Error(ErrorCode::ConfigError, "unknown format '" + text + "' (json, csv)");
}

json to_json(const RunReport& r) {
  return json{
      {"schema_version", kSchemaVersion},
      {"label", r.label},
      {"mode", r.mode},
      {"workload", r.workload},
      {"seed", r.seed},
      {"config", r.config},
      {"total_eus", r.total_eus},
      {"page_size_bytes", r.page_size_bytes},
      {"group_size", r.group_size},
      {"user_pages_written", r.user_pages_written},
      {"user_bytes_written", r.user_bytes_written},
      {"device_page_programs", r.device_page_programs},
      {"device_bytes_written", r.device_bytes_written},
      {"device_reads_charged", r.device_reads_charged},
      {"write_path_reads", r.write_path_reads},
      {"gc_reads", r.gc_reads},
      {"user_reads", r.user_reads},
      {"eus_erased", r.eus_erased},
      {"eus_reopened", r.eus_reopened},
      {"relocations", r.relocations},
      {"gc_steps", r.gc_steps},
      {"padding_slots", r.padding_slots},
      {"patched_cells", r.patched_cells},
      {"makespan_us", r.makespan_us},
      {"write_amplification", r.write_amplification},
      {"read_latency_us", percentiles_json(r.read_latency)},
      {"write_latency_us", percentiles_json(r.write_latency)},
      {"erase_histogram", r.erase_histogram},
      {"max_eu_erases", r.max_eu_erases},
  };
}

RunReport report_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::ParseError, "unsupported report schema_version");
    }
    RunReport r;
    r.label = j.at("label").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.workload = j.at("workload").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = j.value("config", json());
    r.total_eus = j.at("total_eus").get<std::uint64_t>();
    r.page_size_bytes = j.at("page_size_bytes").get<std::uint32_t>();
    r.group_size = j.at("group_size").get<std::uint32_t>();
    r.user_pages_written = j.at("user_pages_written").get<std::uint64_t>();
    r.user_bytes_written = j.at("user_bytes_written").get<std::uint64_t>();
    r.device_page_programs = j.at("device_page_programs").get<std::uint64_t>();
    r.device_bytes_written = j.at("device_bytes_written").get<std::uint64_t>();
    r.device_reads_charged = j.at("device_reads_charged").get<std::uint64_t>();
    r.write_path_reads = j.at("write_path_reads").get<std::uint64_t>();
    r.gc_reads = j.at("gc_reads").get<std::uint64_t>();
    r.user_reads = j.at("user_reads").get<std::uint64_t>();
    r.eus_erased = j.at("eus_erased").get<std::uint64_t>();
    r.eus_reopened = j.at("eus_reopened").get<std::uint64_t>();
    r.relocations = j.at("relocations").get<std::uint64_t>();
    r.gc_steps = j.at("gc_steps").get<std::uint64_t>();
    r.padding_slots = j.at("padding_slots").get<std::uint64_t>();
    r.patched_cells = j.at("patched_cells").get<std::uint64_t>();
    r.makespan_us = j.at("makespan_us").get<Micros>();
    r.write_amplification = j.at("write_amplification").get<double>();
    r.read_latency = percentiles_from(j.at("read_latency_us"));
    r.write_latency = percentiles_from(j.at("write_latency_us"));
    r.erase_histogram = j.at("erase_histogram").get<std::vector<std::uint64_t>>();
    r.max_eu_erases = j.at("max_eu_erases").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report JSON: ") + e.what());
  }
}

const std::string& csv_header() {
  static const std::string header =
      "schema_version,label,mode,workload,seed,total_eus,page_size_bytes,group_size,"
      "user_pages_written,user_bytes_written,device_page_programs,device_bytes_written,"
      "device_reads_charged,write_path_reads,gc_reads,user_reads,eus_erased,eus_reopened,"
      "relocations,gc_steps,padding_slots,patched_cells,makespan_us,write_amplification,"
      "read_p50_us,read_p95_us,read_p99_us,write_p50_us,write_p95_us,write_p99_us,max_eu_erases";
  return header;
}

std::string csv_row(const RunReport& r) {
  std::ostringstream o;
  o << kSchemaVersion << ',' << quote(r.label) << ',' << quote(r.mode) << ',' << quote(r.workload)
    << ',' << r.seed << ',' << r.total_eus << ',' << r.page_size_bytes << ',' << r.group_size
    << ',' << r.user_pages_written << ',' << r.user_bytes_written << ','
    << r.device_page_programs << ',' << r.device_bytes_written << ',' << r.device_reads_charged
    << ',' << r.write_path_reads << ',' << r.gc_reads << ',' << r.user_reads << ','
    << r.eus_erased << ',' << r.eus_reopened << ',' << r.relocations << ',' << r.gc_steps << ','
    << r.padding_slots << ',' << r.patched_cells << ',' << r.makespan_us << ','
    << format_double(r.write_amplification) << ','
    << opt_field(r.read_latency, &Percentiles::p50) << ','
    << opt_field(r.read_latency, &Percentiles::p95) << ','
    << opt_field(r.read_latency, &Percentiles::p99) << ','
    << opt_field(r.write_latency, &Percentiles::p50) << ','
    << opt_field(r.write_latency, &Percentiles::p95) << ','
    << opt_field(r.write_latency, &Percentiles::p99) << ',' << r.max_eu_erases;
  return o.str();
}

void emit(std::ostream& out, const std::vector<RunReport>& reports, Format format) {
  if (format == Format::Json) {
    if (reports.size() == 1) {
      out << to_json(reports.front()).dump(2) << '\n';
    } else {
      json arr = json::array();
      for (const RunReport& r : reports) arr.push_back(to_json(r));
      out << arr.dump(2) << '\n';
    }
    return;
  }
  out << csv_header() << '\n';
  for (const RunReport& r : reports) out << csv_row(r) << '\n';
}

void emit_file(const std::string& path, const std::vector<RunReport>& reports, Format format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  emit(out, reports, format);
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

namespace {

RunReport report_from_csv(const std::vector<std::string>& names,
                          const std::vector<std::string>& f) {
  auto get = [&](const std::string& key) -> const std::string& {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == key) return f.at(i);
    }
    throw Error(ErrorCode::ParseError, "report CSV lacks column '" + key + "'");
  };
  auto u64 = [&](const std::string& key) -> std::uint64_t {
    const std::string& s = get(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::ParseError, "report CSV: bad " + key + " '" + s + "'");
    }
    return v;
  };
  auto pct = [&](const std::string& prefix) -> std::optional<Percentiles> {
    if (get(prefix + "_p50_us").empty()) return std::nullopt;
    return Percentiles{u64(prefix + "_p50_us"), u64(prefix + "_p95_us"), u64(prefix + "_p99_us")};
  };
  RunReport r;
  r.label = get("label");
  r.mode = get("mode");
  r.workload = get("workload");
  r.seed = u64("seed");
  r.total_eus = u64("total_eus");
  r.page_size_bytes = static_cast<std::uint32_t>(u64("page_size_bytes"));
  r.group_size = static_cast<std::uint32_t>(u64("group_size"));
  r.user_pages_written = u64("user_pages_written");
  r.user_bytes_written = u64("user_bytes_written");
  r.device_page_programs = u64("device_page_programs");
  r.device_bytes_written = u64("device_bytes_written");
  r.device_reads_charged = u64("device_reads_charged");
  r.write_path_reads = u64("write_path_reads");
  r.gc_reads = u64("gc_reads");
  r.user_reads = u64("user_reads");
  r.eus_erased = u64("eus_erased");
  r.eus_reopened = u64("eus_reopened");
  r.relocations = u64("relocations");
  r.gc_steps = u64("gc_steps");
  r.padding_slots = u64("padding_slots");
  r.patched_cells = u64("patched_cells");
  r.makespan_us = u64("makespan_us");
  r.write_amplification = std::stod(get("write_amplification"));
  r.read_latency = pct("read");
  r.write_latency = pct("write");
  r.max_eu_erases = u64("max_eu_erases");
  return r;
}

}  // namespace

std::vector<RunReport> load_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open report '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<RunReport> out;
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    if (j.is_array()) {
      for (const json& item : j) out.push_back(report_from_json(item));
    } else {
      out.push_back(report_from_json(j));
    }
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> names;
  while (std::getline(lines, line)) {
    if (line.empty() || line == "\r") continue;
    if (names.empty()) {
      names = split_csv(line);
      continue;
    }
    out.push_back(report_from_csv(names, split_csv(line)));
  }
  if (names.empty()) throw Error(ErrorCode::ParseError, path + ": empty report");
  return out;
}

void write_latency_log(std::ostream& out, const std::vector<LatencyRecord>& records) {
  out << "seq,issue_us,complete_us,op\n";
  for (const LatencyRecord& r : records) {
    out << r.seq << ',' << r.issue_us << ',' << r.complete_us << ','
        << (r.op == workload::Op::Write ? 'W' : 'R') << '\n';
  }
}

}  // namespace womv::metrics
