#include "womv/trace.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "womv/error.hpp"

namespace womv::workload {

namespace {

using LineReader = std::function<bool(std::string&)>;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<Op> parse_op(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "r" || lower == "read") return Op::Read;
  if (lower == "w" || lower == "write") return Op::Write;
  return std::nullopt;
}

std::vector<TraceRecord> parse_lines(const LineReader& next_line, TraceFormat format,
                                     const std::string& origin) {
  std::vector<TraceRecord> records;
  std::string line;
  std::uint64_t line_no = 0;
  bool seen_data = false;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": " + why);
  };

  while (next_line(line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text);
    TraceRecord r;
    std::string_view op_field;
    std::string_view offset_field;
    std::string_view size_field;

    if (format == TraceFormat::MsrCsv) {
      if (fields.size() != 7) fail("expected 7 fields, got " + std::to_string(fields.size()));
      std::uint64_t ticks = 0;
      if (!parse_u64(fields[0], ticks)) fail("bad timestamp '" + std::string(fields[0]) + "'");
      r.timestamp_us = ticks / 10;  // filetime ticks are 100 ns
      op_field = fields[3];
      offset_field = fields[4];
      size_field = fields[5];
    } else {
      if (fields.size() != 3) fail("expected op,offset,size");
      op_field = fields[0];
      offset_field = fields[1];
      size_field = fields[2];
      if (!seen_data && !parse_op(op_field) && !parse_u64(offset_field, r.offset)) {
        seen_data = true;  // header line
        continue;
      }
      r.timestamp_us = records.size();
    }
    seen_data = true;

    const auto op = parse_op(op_field);
    if (!op) fail("bad op '" + std::string(op_field) + "'");
    r.op = *op;
    if (!parse_u64(offset_field, r.offset)) fail("bad offset '" + std::string(offset_field) + "'");
    if (!parse_u64(size_field, r.length)) fail("bad size '" + std::string(size_field) + "'");
    if (r.length == 0) fail("zero-length I/O");
    records.push_back(r);
  }
  return records;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

TraceFormat parse_trace_format(const std::string& text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "msr" || lower == "msrcsv" || lower == "msr-csv") return TraceFormat::MsrCsv;
  if (lower == "generic" || lower == "genericcsv" || lower == "generic-csv" || lower == "csv") {
    return TraceFormat::GenericCsv;
  }
  throw Error(ErrorCode::ConfigError, "unknown trace format '" + text + "' (msr, generic)");
}

std::vector<TraceRecord> parse_trace(std::istream& in, TraceFormat format,
                                     const std::string& origin) {
  return parse_lines([&](std::string& line) { return static_cast<bool>(std::getline(in, line)); },
                     format, origin);
}

std::vector<TraceRecord> parse_trace(const std::string& path, TraceFormat format) {
  if (!ends_with(path, ".gz")) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open trace '" + path + "'");
    return parse_trace(in, format, path);
  }

  gzFile gz = gzopen(path.c_str(), "rb");
  if (!gz) throw Error(ErrorCode::IoError, "cannot open trace '" + path + "'");
  std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(gz, gzclose);
  char buf[8192];
  auto next_line = [&](std::string& line) {
    line.clear();
    while (gzgets(gz, buf, sizeof buf)) {
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        return true;
      }
    }
    int err = Z_OK;
    gzerror(gz, &err);
    if (err != Z_OK && err != Z_STREAM_END) {
      throw Error(ErrorCode::IoError, "corrupt gzip stream in '" + path + "'");
    }
    return !line.empty();
  };
  return parse_lines(next_line, format, path);
}

std::vector<PageAccess> split_pages(const std::vector<TraceRecord>& records,
                                    std::uint32_t page_bytes) {
  std::vector<PageAccess> out;
  out.reserve(records.size());
  for (const TraceRecord& r : records) {
    const std::uint64_t first = r.offset / page_bytes;
    const std::uint64_t last = (r.offset + r.length - 1) / page_bytes;
    for (std::uint64_t p = first; p <= last; ++p) out.push_back(PageAccess{r.op, p});
  }
  return out;
}

ReducedTrace reduce_trace(const std::vector<PageAccess>& accesses, std::uint64_t target,
                          std::uint64_t data_seed) {
  if (target == 0) throw Error(ErrorCode::ConfigError, "reduction target must be >= 1");
  std::unordered_map<std::uint64_t, std::uint32_t> ids;
  std::vector<std::uint32_t> dense(accesses.size());
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < accesses.size(); ++i) {
    const auto [it, inserted] = ids.try_emplace(accesses[i].page, static_cast<std::uint32_t>(ids.size()));
    if (inserted) counts.push_back(0);
    ++counts[it->second];
    dense[i] = it->second;
  }
  const std::uint64_t unique = ids.size();

  std::vector<std::uint32_t> fold(unique);
  std::iota(fold.begin(), fold.end(), 0u);
  if (unique > target) {
    std::vector<std::uint32_t> by_rank(unique);
    std::iota(by_rank.begin(), by_rank.end(), 0u);
    std::stable_sort(by_rank.begin(), by_rank.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return counts[a] > counts[b]; });
    for (std::uint64_t r = 0; r < unique; ++r) {
      fold[by_rank[r]] = static_cast<std::uint32_t>(r * target / unique);
    }
  }

  constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::uint32_t> renumber(std::min<std::uint64_t>(unique, target), kNone);
  ReducedTrace out;
  out.original_unique_pages = unique;
  out.events.reserve(accesses.size());
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < accesses.size(); ++i) {
    std::uint32_t& id = renumber[fold[dense[i]]];
    if (id == kNone) id = next++;
    WorkloadEvent e;
    e.seq = i;
    e.op = accesses[i].op;
    e.lpa = id;
    e.data = DataPolicy::random(data_seed);
    out.events.push_back(e);
  }
  out.unique_pages = next;
  return out;
}

void write_generic_csv(std::ostream& out, const std::vector<WorkloadEvent>& events,
                       std::uint32_t page_bytes) {
  out << "op,offset,size\n";
  for (const WorkloadEvent& e : events) {
    out << (e.op == Op::Write ? 'W' : 'R') << ',' << std::uint64_t{e.lpa} * page_bytes << ','
        << page_bytes << '\n';
  }
}

}  // namespace womv::workload
