#include "womv/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "womv/error.hpp"

namespace womv::cli {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

std::mutex log_mutex;

void log_line(const std::string& text) {
  const std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << text << '\n';
}

std::uint32_t group_size_for(std::uint32_t logical_page_bytes, const device::Geometry& geo,
                             unsigned data_bits_per_cell) {
  const std::uint64_t bits = std::uint64_t{logical_page_bytes} * 8;
  const std::uint64_t per_page = std::uint64_t{geo.cells_per_page()} * data_bits_per_cell;
  if (per_page == 0 || bits % per_page != 0) return 0;
  return static_cast<std::uint32_t>(bits / per_page);
}

unsigned mode_data_bits(const ftl::FtlMode& mode, const device::Geometry& geo) {
  return mode.wom ? mode.data_bits : geo.bits_per_cell;
}

std::vector<workload::PageAccess> as_accesses(const std::vector<workload::WorkloadEvent>& events) {
  std::vector<workload::PageAccess> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back({e.op, e.lpa});
  return out;
}

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

}  // namespace

// --- config ------------------------------------------------------------------

device::LatencyModel latency_preset(const std::string& name) {
  if (name == "qlc-default" || name == "qlc") return device::LatencyModel::qlc_default();
  if (name == "mlc-default" || name == "mlc") return device::LatencyModel::mlc_default();
  config_error("unknown latency preset '" + name + "' (qlc-default, mlc-default)");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  reject_unknown(j,
                 {"geometry", "latency", "ftl", "modes", "baseline", "workload", "trace", "seed",
                  "label", "audit", "output"},
                 "config");
  ExperimentConfig c;

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    reject_unknown(g, {"num_pus", "chunks_per_pu", "pages_per_chunk", "page_size_bytes", "bits_per_cell"},
                   "geometry");
    read_key(g, "num_pus", c.geometry.num_pus);
    read_key(g, "chunks_per_pu", c.geometry.chunks_per_pu);
    read_key(g, "pages_per_chunk", c.geometry.pages_per_chunk);
    read_key(g, "page_size_bytes", c.geometry.page_size_bytes);
    read_key(g, "bits_per_cell", c.geometry.bits_per_cell);
  }

  if (j.contains("latency")) {
    const json& l = j["latency"];
    if (l.is_string()) {
      c.latency_name = l.get<std::string>();
      c.latency = latency_preset(c.latency_name);
    } else if (l.is_object()) {
      reject_unknown(l, {"preset", "write_us", "read_us", "const_read_us", "const_write_us", "erase_us"},
                     "latency");
      if (l.contains("preset")) {
        c.latency_name = l["preset"].get<std::string>();
        c.latency = latency_preset(c.latency_name);
      } else {
        c.latency_name = "custom";
      }
      read_key(l, "write_us", c.latency.write_us);
      read_key(l, "read_us", c.latency.read_us);
      read_key(l, "const_read_us", c.latency.const_read_us);
      read_key(l, "const_write_us", c.latency.const_write_us);
      read_key(l, "erase_us", c.latency.erase_us);
      if (l.contains("write_us") || l.contains("read_us") || l.contains("const_read_us") ||
          l.contains("const_write_us") || l.contains("erase_us")) {
        c.latency_name = "custom";
      }
    } else {
      config_error("latency must be a preset name or a table");
    }
  } else if (c.geometry.bits_per_cell == 2) {
    c.latency_name = "mlc-default";
    c.latency = device::LatencyModel::mlc_default();
  }

  if (j.contains("ftl")) {
    const json& f = j["ftl"];
    reject_unknown(f, {"mode", "ecc_threshold", "op_reserve", "ring_capacity_pages",
                       "exposed_logical_pages", "logical_page_bytes", "error_on_unmapped_read"},
                   "ftl");
    if (f.contains("mode")) c.ftl.mode = ftl::FtlMode::parse(f["mode"].get<std::string>());
    read_key(f, "ecc_threshold", c.ftl.ecc_threshold);
    read_key(f, "op_reserve", c.ftl.op_reserve);
    read_key(f, "ring_capacity_pages", c.ftl.ring_capacity_pages);
    read_key(f, "exposed_logical_pages", c.ftl.exposed_logical_pages);
    read_key(f, "logical_page_bytes", c.ftl.logical_page_bytes);
    read_key(f, "error_on_unmapped_read", c.ftl.error_on_unmapped_read);
  }

  if (j.contains("modes")) {
    for (const json& m : j["modes"]) c.modes.push_back(ftl::FtlMode::parse(m.get<std::string>()));
  }
  read_key(j, "baseline", c.baseline);

  if (j.contains("workload") && j.contains("trace")) config_error("give either workload or trace, not both");
  if (j.contains("workload")) {
    const json& w = j["workload"];
    reject_unknown(w, {"kind", "flip_fraction", "hot_fraction", "hot_share", "total_bytes", "passes",
                       "logical_pages"},
                   "workload");
    workload::MicrobenchSpec spec;
    double param = -1.0;
    if (!w.contains("kind")) config_error("workload needs a kind");
    spec.kind = workload::parse_microbench_kind(w["kind"].get<std::string>(), &param);
    if (param >= 0.0) {
      if (spec.kind == workload::MicrobenchKind::DataChange) spec.flip_fraction = param;
      if (spec.kind == workload::MicrobenchKind::Cold) spec.hot_fraction = param;
    }
    read_key(w, "flip_fraction", spec.flip_fraction);
    read_key(w, "hot_fraction", spec.hot_fraction);
    read_key(w, "hot_share", spec.hot_share);
    read_key(w, "total_bytes", spec.total_bytes);
    read_key(w, "logical_pages", c.logical_pages);
    if (w.contains("passes")) {
      if (w.contains("total_bytes")) config_error("give total_bytes or passes, not both");
      // Resolved once the logical space is known.
      c.microbench_passes = w["passes"].get<double>();
      if (!(c.microbench_passes > 0.0)) config_error("passes must be positive");
    }
    c.microbench = spec;
  }
  if (j.contains("trace")) {
    const json& t = j["trace"];
    reject_unknown(t, {"path", "format", "target_pages", "drive_factor", "auto_size", "min_eus"}, "trace");
    TraceSource src;
    read_key(t, "path", src.path);
    if (src.path.empty()) config_error("trace needs a path");
    if (t.contains("format")) src.format = workload::parse_trace_format(t["format"].get<std::string>());
    read_key(t, "target_pages", src.target_pages);
    read_key(t, "drive_factor", src.drive_factor);
    read_key(t, "auto_size", src.auto_size);
    read_key(t, "min_eus", src.min_eus);
    if (!(src.drive_factor >= 1.0)) config_error("drive_factor must be >= 1");
    c.trace = src;
  }

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) config_error("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  read_key(j, "label", c.label);
  read_key(j, "audit", c.audit);

  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, {"report", "format", "latency_log"}, "output");
    read_key(o, "report", c.out);
    if (o.contains("format")) c.format = metrics::parse_format(o["format"].get<std::string>());
    read_key(o, "latency_log", c.latency_log);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["geometry"] = {{"num_pus", c.geometry.num_pus},
                   {"chunks_per_pu", c.geometry.chunks_per_pu},
                   {"pages_per_chunk", c.geometry.pages_per_chunk},
                   {"page_size_bytes", c.geometry.page_size_bytes},
                   {"bits_per_cell", c.geometry.bits_per_cell}};
  j["latency"] = {{"preset", c.latency_name},
                  {"write_us", c.latency.write_us},
                  {"read_us", c.latency.read_us},
                  {"const_read_us", c.latency.const_read_us},
                  {"const_write_us", c.latency.const_write_us},
                  {"erase_us", c.latency.erase_us}};
  j["ftl"] = {{"mode", c.ftl.mode.name()},
              {"ecc_threshold", c.ftl.ecc_threshold},
              {"op_reserve", c.ftl.op_reserve},
              {"ring_capacity_pages", c.ftl.ring_capacity_pages},
              {"exposed_logical_pages", c.ftl.exposed_logical_pages},
              {"logical_page_bytes", c.ftl.logical_page_bytes},
              {"error_on_unmapped_read", c.ftl.error_on_unmapped_read}};
  if (!c.modes.empty()) {
    json modes = json::array();
    for (const auto& m : c.modes) modes.push_back(m.name());
    j["modes"] = modes;
  }
  j["baseline"] = c.baseline;
  if (c.microbench) {
    const auto& s = *c.microbench;
    j["workload"] = {{"kind", workload::to_string(s.kind)},
                     {"flip_fraction", s.flip_fraction},
                     {"hot_fraction", s.hot_fraction},
                     {"hot_share", s.hot_share},
                     {"total_bytes", s.total_bytes},
                     {"logical_pages", c.logical_pages}};
    if (c.microbench_passes > 0.0) j["workload"]["passes"] = c.microbench_passes;
  }
  if (c.trace) {
    j["trace"] = {{"path", c.trace->path},
                  {"format", c.trace->format == workload::TraceFormat::MsrCsv ? "msr" : "generic"},
                  {"target_pages", c.trace->target_pages},
                  {"drive_factor", c.trace->drive_factor},
                  {"auto_size", c.trace->auto_size},
                  {"min_eus", c.trace->min_eus}};
  }
  if (c.seed) j["seed"] = *c.seed;
  if (!c.label.empty()) j["label"] = c.label;
  j["audit"] = c.audit;
  return j;
}

// --- sizing ------------------------------------------------------------------

std::uint64_t default_microbench_pages(const ExperimentConfig& config) {
  std::uint32_t group = group_size_for(config.ftl.logical_page_bytes, config.geometry, 1);
  if (group == 0) {
    group = group_size_for(config.ftl.logical_page_bytes, config.geometry, config.geometry.bits_per_cell);
  }
  if (group == 0) config_error("logical page size does not map onto whole physical pages");
  return ftl::default_exposed_pages(config.geometry, config.ftl.op_reserve, group);
}

PreparedTrace prepare_trace(const ExperimentConfig& config, const ftl::FtlMode& mode) {
  if (!config.trace) config_error("no trace configured");
  const TraceSource& src = *config.trace;
  const std::uint32_t page_bytes = config.ftl.logical_page_bytes;
  const auto records = workload::parse_trace(src.path, src.format);
  if (records.empty()) throw Error(ErrorCode::ParseError, src.path + ": trace has no records");
  const auto accesses = workload::split_pages(records, page_bytes);
  const std::uint64_t seed = config.seed.value_or(0);

  PreparedTrace p;
  const std::uint64_t target = src.target_pages == 0 ? UINT32_MAX : src.target_pages;
  p.trace = workload::reduce_trace(accesses, target, seed);
  p.geometry = config.geometry;

  const std::uint64_t footprint = p.trace.unique_pages;
  p.drive_pages_target =
      static_cast<std::uint64_t>(std::ceil(src.drive_factor * static_cast<double>(footprint) - 1e-9));
  if (src.auto_size) {
    const std::uint64_t per_eu = p.geometry.pages_per_eu();
    const std::uint64_t eus = std::max<std::uint64_t>((p.drive_pages_target + per_eu - 1) / per_eu, src.min_eus);
    if (eus > UINT32_MAX) config_error("trace footprint too large for the geometry");
    p.geometry.chunks_per_pu = static_cast<std::uint32_t>(eus);
  }

  // A mode whose encoded footprint does not fit folds the trace further.
  const std::uint32_t group =
      group_size_for(page_bytes, p.geometry, mode_data_bits(mode, p.geometry));
  if (group == 0) config_error("logical page size does not map onto whole physical pages");
  const std::uint64_t cap = ftl::default_exposed_pages(p.geometry, config.ftl.op_reserve, group);
  if (cap == 0) config_error("device too small for the trace");
  if (footprint > cap) {
    const std::uint64_t original = p.trace.original_unique_pages;
    p.trace = workload::reduce_trace(as_accesses(p.trace.events), cap, seed);
    p.trace.original_unique_pages = original;
  }
  p.logical_pages = std::max<std::uint64_t>(p.trace.unique_pages, 1);
  return p;
}

workload::ReducedTrace reduce_file(const std::string& in, workload::TraceFormat format,
                                   std::uint64_t target, std::uint32_t page_bytes,
                                   const std::string& out) {
  const auto records = workload::parse_trace(in, format);
  auto reduced = workload::reduce_trace(workload::split_pages(records, page_bytes), target);
  std::ofstream file(out);
  if (!file) throw Error(ErrorCode::IoError, "cannot write '" + out + "'");
  workload::write_generic_csv(file, reduced.events, page_bytes);
  if (!file) throw Error(ErrorCode::IoError, "write failed for '" + out + "'");
  return reduced;
}

// --- runs --------------------------------------------------------------------

RunResult run_experiment(const ExperimentConfig& config, const ftl::FtlMode& mode,
                         const RunOptions& options) {
  if (!config.seed) config_error("a seed is required (--seed)");
  if (config.microbench.has_value() == config.trace.has_value()) {
    config_error("configure exactly one of a microbenchmark workload or a trace");
  }
  const std::uint64_t seed = *config.seed;
  const std::uint32_t page_bytes = config.ftl.logical_page_bytes;

  ftl::FtlConfig fcfg = config.ftl;
  fcfg.mode = mode;
  device::Geometry geometry = config.geometry;
  std::string workload_name;
  json extra;

  std::optional<workload::MicrobenchGenerator> generator;
  std::optional<PreparedTrace> prepared;
  bool needs_prior = false;

  if (config.microbench) {
    workload::MicrobenchSpec spec = *config.microbench;
    spec.seed = seed;
    spec.page_bytes = page_bytes;
    const std::uint64_t pages =
        config.logical_pages != 0 ? config.logical_pages : default_microbench_pages(config);
    if (pages > UINT32_MAX) config_error("logical space too large");
    if (config.microbench_passes > 0.0) {
      spec.total_bytes = static_cast<std::uint64_t>(
                             std::llround(config.microbench_passes * static_cast<double>(pages))) *
                         page_bytes;
    } else if (spec.total_bytes == 0) {
      // 25x the physical capacity.
      spec.total_bytes = 25 * geometry.total_pages() * geometry.page_size_bytes / page_bytes * page_bytes;
    }
    fcfg.exposed_logical_pages = pages;
    generator.emplace(spec, static_cast<std::uint32_t>(pages));
    needs_prior = spec.kind == workload::MicrobenchKind::DataChange;
    workload_name = spec.name();
    extra["logical_pages"] = pages;
    extra["total_bytes"] = spec.total_bytes;
  } else {
    prepared = prepare_trace(config, mode);
    geometry = prepared->geometry;
    fcfg.exposed_logical_pages = prepared->logical_pages;
    workload_name = "trace";
    extra["logical_pages"] = prepared->logical_pages;
    extra["trace_unique_pages"] = prepared->trace.unique_pages;
    extra["trace_original_unique_pages"] = prepared->trace.original_unique_pages;
    extra["drive_pages_target"] = prepared->drive_pages_target;
    extra["trace_events"] = prepared->trace.events.size();
  }

  ftl::Ftl ftl(device::Device(geometry, config.latency), fcfg);
  const std::string label = config.label.empty() ? mode.name() : config.label + ":" + mode.name();
  if (!options.quiet) {
    log_line("[" + label + "] " + workload_name + " on " + std::to_string(geometry.num_eus()) + " EUs, " +
             std::to_string(fcfg.exposed_logical_pages) + " logical pages");
  }

  std::vector<std::uint8_t> prior;
  if (needs_prior) prior.assign(fcfg.exposed_logical_pages * page_bytes, 0);
  std::vector<std::uint8_t> buffer(page_bytes);
  std::vector<device::Micros> read_lat;
  std::vector<device::Micros> write_lat;
  std::vector<metrics::LatencyRecord> log;

  device::Micros now = 0;
  std::uint64_t done = 0;
  std::optional<ftl::FtlStats> snapshot;
  const std::uint64_t total = generator ? generator->total_events() : prepared->trace.events.size();
  const std::uint64_t report_every = std::max<std::uint64_t>(total / 10, 1);

  auto replay = [&](const workload::WorkloadEvent& e) {
    const device::Micros issue = now;
    device::Micros complete;
    if (e.op == workload::Op::Write) {
      std::span<std::uint8_t> prior_page;
      if (needs_prior) {
        prior_page = std::span<std::uint8_t>(prior).subspan(std::size_t{e.lpa} * page_bytes, page_bytes);
      }
      workload::synth_data(e.data, e.seq, prior_page, buffer);
      if (needs_prior) std::copy(buffer.begin(), buffer.end(), prior_page.begin());
      complete = ftl.write(e.lpa, buffer, issue).completion;
      write_lat.push_back(complete - issue);
    } else {
      complete = ftl.read(e.lpa, issue).completion;
      read_lat.push_back(complete - issue);
    }
    if (options.keep_latency_log) log.push_back({e.seq, issue, complete, e.op});
    now = std::max(now, complete);
    ++done;
    if (done == options.snapshot_after) snapshot = ftl.metrics_snapshot();
    if (!options.quiet && done % report_every == 0) {
      log_line("[" + label + "] " + std::to_string(done * 100 / total) + "%");
    }
  };

  if (generator) {
    while (auto e = generator->next()) replay(*e);
  } else {
    for (const auto& e : prepared->trace.events) replay(e);
  }
  ftl.sync(now);

  if (config.audit) {
    const auto problems = ftl.audit();
    if (!problems.empty()) {
      throw std::logic_error("FTL audit failed: " + problems.front());
    }
  }

  RunResult result;
  result.report = metrics::finalize(ftl, std::move(read_lat), std::move(write_lat));
  // Sweeps label by mode so compare() can find the baseline.
  result.report.label = config.label.empty() || !config.modes.empty() ? mode.name() : config.label;
  result.report.workload = workload_name;
  result.report.seed = seed;
  ExperimentConfig echo = config;
  echo.ftl.mode = mode;
  echo.geometry = geometry;
  echo.ftl.exposed_logical_pages = fcfg.exposed_logical_pages;
  result.report.config = to_json(echo);
  result.report.config["run"] = extra;
  if (config.trace) result.report.config["trace"]["path"] = basename_of(config.trace->path);
  result.latency_log = std::move(log);
  result.snapshot = snapshot;
  return result;
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("WOMV_SIM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunResult> run_sweep(const ExperimentConfig& config, unsigned threads,
                                 const RunOptions& options) {
  if (config.modes.empty()) config_error("sweep needs at least one mode");
  if (threads == 0) threads = sweep_threads();
  threads = std::min<unsigned>(threads, static_cast<unsigned>(config.modes.size()));

  std::vector<std::optional<RunResult>> slots(config.modes.size());
  std::vector<std::exception_ptr> errors(config.modes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.modes.size(); i = next++) {
      try {
        slots[i] = run_experiment(config, config.modes[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunResult> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace womv::cli
