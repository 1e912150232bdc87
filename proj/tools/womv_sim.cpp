// womv_sim: command-line front end for the simulator.
//
//   womv_sim microbench --workload hot-s --mode 'WOM-v(2,4)' --seed 1
//   womv_sim trace      --trace prxy_0.csv.gz --mode 'WOM-v(2,4)-GC_OPT' --seed 1
//   womv_sim sweep      --config exp.json --mode NO_WOM --mode 'WOM-v(2,4)' --seed 1
//   womv_sim reduce     --in big.csv --target 100000 --out small.csv
//   womv_sim compare    --baseline NO_WOM a.json b.json
//
// Reports go to --out or stdout; progress and errors go to stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "womv/cli.hpp"
#include "womv/error.hpp"

using namespace womv;

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> modes;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::string latency_log;
  std::string workload;
  std::string trace;
  std::string trace_format;
  std::optional<std::uint64_t> target;
  std::optional<std::uint64_t> total_bytes;
  std::optional<double> passes;
  std::optional<std::uint64_t> logical_pages;
  std::string table_out;
  std::string baseline;
  bool quiet = false;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool many_modes) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  if (many_modes) {
    cmd->add_option("--mode", f.modes, "FTL mode; repeat for each sweep leg");
  } else {
    cmd->add_option("--mode", f.modes, "FTL mode, e.g. NO_WOM or WOM-v(2,4)-GC_OPT")->expected(1);
  }
  cmd->add_option("--seed", f.seed, "workload seed (required)");
  cmd->add_option("--out", f.out, "report path (default stdout)");
  cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--quiet", f.quiet, "no progress on stderr");
}

void add_workload_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--workload", f.workload, "hot-s, hot-r, cold(h), low-gc, high-gc, data-change(f)");
  cmd->add_option("--total-bytes", f.total_bytes, "bytes to write");
  cmd->add_option("--passes", f.passes, "full logical-space passes to write");
  cmd->add_option("--logical-pages", f.logical_pages, "logical space in pages");
}

void add_trace_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--trace", f.trace, "trace file (.gz accepted)");
  cmd->add_option("--trace-format", f.trace_format, "msr or generic");
  cmd->add_option("--target", f.target, "reduce the trace to at most this many pages");
}

cli::ExperimentConfig build_config(const Flags& f, bool want_trace) {
  cli::ExperimentConfig c = f.config.empty() ? cli::ExperimentConfig{} : cli::load_config(f.config);
  if (!f.modes.empty()) {
    if (f.modes.size() == 1) c.ftl.mode = ftl::FtlMode::parse(f.modes.front());
    c.modes.clear();
    for (const auto& m : f.modes) c.modes.push_back(ftl::FtlMode::parse(m));
  }
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (!f.format.empty()) c.format = metrics::parse_format(f.format);
  if (!f.latency_log.empty()) c.latency_log = f.latency_log;
  if (!f.baseline.empty()) c.baseline = f.baseline;

  if (!f.workload.empty()) {
    if (c.trace) throw Error(ErrorCode::ConfigError, "--workload given but the config names a trace");
    workload::MicrobenchSpec spec = c.microbench.value_or(workload::MicrobenchSpec{});
    double param = -1.0;
    spec.kind = workload::parse_microbench_kind(f.workload, &param);
    if (param >= 0.0 && spec.kind == workload::MicrobenchKind::DataChange) spec.flip_fraction = param;
    if (param >= 0.0 && spec.kind == workload::MicrobenchKind::Cold) spec.hot_fraction = param;
    c.microbench = spec;
  }
  if (c.microbench) {
    if (f.total_bytes) {
      c.microbench->total_bytes = *f.total_bytes;
      c.microbench_passes = 0.0;
    }
    if (f.passes) {
      c.microbench_passes = *f.passes;
      c.microbench->total_bytes = 0;
    }
    if (f.logical_pages) c.logical_pages = *f.logical_pages;
  }

  if (!f.trace.empty()) {
    if (c.microbench && f.workload.empty() && !f.config.empty()) c.microbench.reset();
    cli::TraceSource src = c.trace.value_or(cli::TraceSource{});
    src.path = f.trace;
    c.trace = src;
  }
  if (c.trace) {
    if (!f.trace_format.empty()) c.trace->format = workload::parse_trace_format(f.trace_format);
    if (f.target) c.trace->target_pages = *f.target;
  }

  if (want_trace && !c.trace) throw Error(ErrorCode::ConfigError, "no trace given (--trace or config)");
  if (!want_trace && c.trace && c.microbench) {
    throw Error(ErrorCode::ConfigError, "configure either a workload or a trace, not both");
  }
  if (!c.seed) throw Error(ErrorCode::ConfigError, "--seed is required");
  return c;
}

void write_reports(const cli::ExperimentConfig& c, const std::vector<metrics::RunReport>& reports) {
  if (c.out.empty() || c.out == "-") {
    metrics::emit(std::cout, reports, c.format);
  } else {
    metrics::emit_file(c.out, reports, c.format);
  }
}

void write_latency_log(const std::string& path, const std::vector<metrics::LatencyRecord>& log) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  metrics::write_latency_log(out, log);
}

int run_single(const Flags& f, bool trace) {
  cli::ExperimentConfig c = build_config(f, trace);
  c.modes.clear();  // a single run keeps the configured label
  if (!trace && !c.microbench) throw Error(ErrorCode::ConfigError, "no workload given (--workload or config)");
  cli::RunOptions opts;
  opts.keep_latency_log = !c.latency_log.empty();
  opts.quiet = f.quiet;
  const auto result = cli::run_experiment(c, c.ftl.mode, opts);
  write_reports(c, {result.report});
  if (opts.keep_latency_log) write_latency_log(c.latency_log, result.latency_log);
  return 0;
}

int run_sweep(const Flags& f) {
  const cli::ExperimentConfig c = build_config(f, false);
  if (c.modes.empty()) throw CLI::ValidationError("--mode", "sweep needs at least one mode");
  cli::RunOptions opts;
  opts.quiet = f.quiet;
  const auto results = cli::run_sweep(c, 0, opts);
  std::vector<metrics::RunReport> reports;
  for (const auto& r : results) reports.push_back(r.report);
  write_reports(c, reports);

  const bool have_baseline =
      std::any_of(reports.begin(), reports.end(), [&](const auto& r) { return r.label == c.baseline; });
  if (have_baseline) {
    const auto cmp = metrics::compare(reports, c.baseline);
    metrics::print_comparison(std::cerr, cmp);
    if (!f.table_out.empty()) {
      std::ofstream out(f.table_out);
      if (!out) throw Error(ErrorCode::IoError, "cannot write '" + f.table_out + "'");
      metrics::write_comparison_csv(out, cmp);
    }
  } else if (!f.table_out.empty()) {
    throw Error(ErrorCode::ConfigError, "baseline '" + c.baseline + "' is not among the swept modes");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WOM-v QLC SSD simulator"};
  app.require_subcommand(1);
  Flags f;

  auto* micro = app.add_subcommand("microbench", "run one microbenchmark under one mode");
  add_run_flags(micro, f, false);
  add_workload_flags(micro, f);
  micro->add_option("--latency-log", f.latency_log, "per-request latency CSV");

  auto* trace = app.add_subcommand("trace", "replay a block trace under one mode");
  add_run_flags(trace, f, false);
  add_trace_flags(trace, f);
  trace->add_option("--latency-log", f.latency_log, "per-request latency CSV");

  auto* sweep = app.add_subcommand("sweep", "run one workload under several modes");
  add_run_flags(sweep, f, true);
  add_workload_flags(sweep, f);
  add_trace_flags(sweep, f);
  sweep->add_option("--baseline", f.baseline, "label to compare against (default NO_WOM)");
  sweep->add_option("--table-out", f.table_out, "comparison table as CSV");

  auto* reduce = app.add_subcommand("reduce", "fold a trace onto fewer pages, write generic CSV");
  std::string reduce_in;
  std::string reduce_out;
  std::string reduce_format = "msr";
  std::uint64_t reduce_target = 0;
  std::uint32_t page_bytes = 4096;
  reduce->add_option("--in", reduce_in, "input trace")->required();
  reduce->add_option("--out", reduce_out, "output generic CSV")->required();
  reduce->add_option("--target", reduce_target, "maximum unique pages")->required()->check(CLI::PositiveNumber);
  reduce->add_option("--trace-format", reduce_format, "msr or generic");
  reduce->add_option("--page-bytes", page_bytes, "page size")->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "tabulate reports against a baseline");
  std::vector<std::string> report_files;
  std::string compare_baseline = "NO_WOM";
  std::string compare_out;
  compare->add_option("reports", report_files, "report files (JSON or CSV)")->required();
  compare->add_option("--baseline", compare_baseline, "baseline label");
  compare->add_option("--out", compare_out, "write the table as CSV instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (micro->parsed()) return run_single(f, false);
    if (trace->parsed()) return run_single(f, true);
    if (sweep->parsed()) return run_sweep(f);
    if (reduce->parsed()) {
      const auto r = cli::reduce_file(reduce_in, workload::parse_trace_format(reduce_format),
                                      reduce_target, page_bytes, reduce_out);
      std::cerr << "reduced " << r.original_unique_pages << " unique pages to " << r.unique_pages
                << " (" << r.events.size() << " page accesses)\n";
      return 0;
    }
    if (compare->parsed()) {
      std::vector<metrics::RunReport> reports;
      for (const auto& path : report_files) {
        for (auto& r : metrics::load_reports(path)) reports.push_back(std::move(r));
      }
      const auto cmp = metrics::compare(reports, compare_baseline);
      if (compare_out.empty()) {
        metrics::print_comparison(std::cout, cmp);
      } else {
        std::ofstream out(compare_out);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + compare_out + "'");
        metrics::write_comparison_csv(out, cmp);
      }
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "womv_sim: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ParameterOutOfRange;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "womv_sim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
