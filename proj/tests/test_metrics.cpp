#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "womv/error.hpp"
#include "womv/metrics.hpp"

using namespace womv;
using namespace womv::metrics;

namespace {

RunReport sample(const std::string& label, std::uint64_t erases, Micros makespan) {
  RunReport r;
  r.label = label;
  r.mode = label;
  r.workload = "hot-s";
  r.seed = 7;
  r.config = {{"seed", 7}};
  r.total_eus = 16;
  r.page_size_bytes = 4096;
  r.group_size = 2;
  r.user_pages_written = 1000;
  r.user_bytes_written = 1000 * 4096;
  r.device_page_programs = 2100;
  r.device_bytes_written = 2100 * 4096;
  r.eus_erased = erases;
  r.makespan_us = makespan;
  r.write_amplification = 2.1;
  r.write_latency = Percentiles{10, 5400, 9000};
  r.erase_histogram = std::vector<std::uint64_t>(16, erases / 16);
  r.max_eu_erases = erases / 16;
  return r;
}

}  // namespace

TEST(Percentiles, EmptyIsAbsent) { EXPECT_FALSE(percentiles({}).has_value()); }

TEST(Percentiles, SingleValue) {
  const auto p = percentiles({88});
  ASSERT_TRUE(p);
  EXPECT_EQ(p->p50, 88u);
  EXPECT_EQ(p->p95, 88u);
  EXPECT_EQ(p->p99, 88u);
}

TEST(Percentiles, NearestRank) {
  std::vector<Micros> v;
  for (Micros i = 100; i >= 1; --i) v.push_back(i);
  const auto p = percentiles(v);
  EXPECT_EQ(p->p50, 50u);
  EXPECT_EQ(p->p95, 95u);
  EXPECT_EQ(p->p99, 99u);
  // n=3: ranks ceil(1.5)=2, ceil(2.85)=3, ceil(2.97)=3
  const auto q = percentiles({30, 10, 20});
  EXPECT_EQ(q->p50, 20u);
  EXPECT_EQ(q->p95, 30u);
}

TEST(Finalize, SequentialNoWomFillHasUnitAmplification) {
  device::Geometry g;
  g.num_pus = 4;
  g.chunks_per_pu = 16;
  g.pages_per_chunk = 16;
  ftl::FtlConfig cfg;
  cfg.mode = ftl::FtlMode::no_wom();
  ftl::Ftl f(device::Device(g, device::LatencyModel::qlc_default()), cfg);
  std::vector<std::uint8_t> page(4096, 0xa5);
  for (ftl::Lpa l = 0; l < f.exposed_logical_pages(); ++l) f.write(l, page, 0);
  f.sync(0);
  const RunReport r = finalize(f, {}, {});
  EXPECT_DOUBLE_EQ(r.write_amplification, 1.0);
  EXPECT_EQ(r.user_pages_written, f.exposed_logical_pages());
  EXPECT_EQ(r.eus_erased, 0u);
  EXPECT_EQ(r.erase_histogram.size(), 16u);
  EXPECT_FALSE(r.read_latency);
  EXPECT_EQ(r.mode, "NO_WOM");
  EXPECT_GT(r.makespan_us, 0u);
}

TEST(Finalize, NoWritesGivesZeroAmplification) {
  device::Geometry g;
  g.chunks_per_pu = 16;
  g.pages_per_chunk = 16;
  ftl::FtlConfig cfg;
  ftl::Ftl f(device::Device(g, device::LatencyModel::qlc_default()), cfg);
  EXPECT_EQ(finalize(f, {}, {}).write_amplification, 0.0);
}

TEST(Endurance, PeLimitRatio) {
  const RunReport r = sample("x", 100, 1);
  const auto ratio = endurance_ratio(r, EnduranceModel::qlc(), r, EnduranceModel::mlc());
  ASSERT_EQ(ratio.status, EnduranceRatio::Status::Finite);
  EXPECT_NEAR(ratio.value, 0.3, 1e-12);
  EXPECT_EQ(ratio.to_string(), "0.300");
}

TEST(Endurance, HalfTheErasesDoublesLifetime) {
  const RunReport a = sample("a", 50, 1);
  const RunReport b = sample("b", 100, 1);
  const auto ratio = endurance_ratio(a, EnduranceModel::qlc(), b, EnduranceModel::qlc());
  EXPECT_NEAR(ratio.value, 2.0, 1e-12);
  EXPECT_NEAR(*endurance_bytes(b, EnduranceModel::qlc()), 3000.0 * 16 * 4096000 / 100, 1e-3);
}

TEST(Endurance, ZeroErases) {
  const RunReport none = sample("a", 0, 1);
  const RunReport some = sample("b", 10, 1);
  EXPECT_FALSE(endurance_bytes(none, EnduranceModel::qlc()));
  EXPECT_EQ(endurance_ratio(none, EnduranceModel::qlc(), some, EnduranceModel::qlc()).status,
            EnduranceRatio::Status::Infinite);
  EXPECT_EQ(endurance_ratio(some, EnduranceModel::qlc(), none, EnduranceModel::qlc()).status,
            EnduranceRatio::Status::Undefined);
  EXPECT_EQ(endurance_ratio(none, EnduranceModel::qlc(), none, EnduranceModel::qlc()).to_string(),
            "undefined");
}

TEST(Compare, ReductionText) {
  const Comparison c = compare({sample("NO_WOM", 100, 1000), sample("WOM-v(2,4)", 30, 1250),
                                sample("same", 100, 1000), sample("worse", 125, 900)},
                               "NO_WOM");
  ASSERT_EQ(c.rows.size(), 4u);
  EXPECT_EQ(reduction_text(c.rows[1].erase_reduction_pct), "70.0% reduction");
  EXPECT_NEAR(*c.rows[1].makespan_delta_pct, 25.0, 1e-9);
  EXPECT_EQ(*c.rows[2].erase_reduction_pct, 0.0);
  EXPECT_EQ(reduction_text(c.rows[3].erase_reduction_pct), "-25.0% reduction");
  EXPECT_NEAR(*c.rows[3].makespan_delta_pct, -10.0, 1e-9);
}

TEST(Compare, BaselineWithoutErases) {
  const Comparison c = compare({sample("base", 0, 1), sample("b", 5, 1), sample("c", 0, 1)}, "base");
  EXPECT_FALSE(c.rows[1].erase_reduction_pct);
  EXPECT_EQ(reduction_text(c.rows[1].erase_reduction_pct), "n/a");
  EXPECT_EQ(*c.rows[2].erase_reduction_pct, 0.0);
}

TEST(Compare, MissingBaselineThrows) {
  try {
    compare({sample("a", 1, 1)}, "NO_WOM");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Compare, CsvHasOneRowPerReport) {
  const Comparison c = compare({sample("NO_WOM", 100, 1000), sample("WOM-v(2,4)", 30, 1250)}, "NO_WOM");
  std::ostringstream out;
  write_comparison_csv(out, c);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
  EXPECT_NE(out.str().find("\"WOM-v(2,4)\",30,70"), std::string::npos);
  std::ostringstream table;
  print_comparison(table, c);
  EXPECT_NE(table.str().find("70.0% reduction"), std::string::npos);
}

TEST(Emit, JsonRoundTrip) {
  const RunReport r = sample("WOM-v(2,4)-GC_OPT", 42, 123456);
  EXPECT_EQ(report_from_json(to_json(r)), r);
  EXPECT_EQ(to_json(r).at("schema_version"), kSchemaVersion);
  EXPECT_TRUE(to_json(r).at("read_latency_us").is_null());

  const auto dir = std::filesystem::temp_directory_path() / "womv_metrics_test";
  std::filesystem::create_directories(dir);
  const std::string one = (dir / "one.json").string();
  const std::string many = (dir / "many.json").string();
  emit_file(one, {r}, Format::Json);
  emit_file(many, {r, sample("NO_WOM", 99, 1)}, Format::Json);
  EXPECT_EQ(load_reports(one), std::vector<RunReport>{r});
  EXPECT_EQ(load_reports(many).size(), 2u);
  std::filesystem::remove_all(dir);
}

TEST(Emit, JsonIsDeterministic) {
  std::ostringstream a;
  std::ostringstream b;
  emit(a, {sample("x", 1, 2)}, Format::Json);
  emit(b, {sample("x", 1, 2)}, Format::Json);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Emit, CsvHeaderIsStableAndRowsParseBack) {
  EXPECT_EQ(csv_header().rfind("schema_version,label,mode,workload,seed,", 0), 0u);
  RunReport r = sample("WOM-v(2,4)", 42, 123456);
  r.read_latency = Percentiles{88, 104, 1050};
  std::ostringstream out;
  emit(out, {r}, Format::Csv);
  const auto dir = std::filesystem::temp_directory_path() / "womv_metrics_csv";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "r.csv").string();
  std::ofstream(path) << out.str();
  const auto back = load_reports(path);
  ASSERT_EQ(back.size(), 1u);
  // CSV carries neither the config echo nor the histogram.
  RunReport expect = r;
  expect.config = nullptr;
  expect.erase_histogram.clear();
  EXPECT_EQ(back[0], expect);
  std::filesystem::remove_all(dir);
}

TEST(Emit, BadInputs) {
  EXPECT_THROW(parse_format("xml"), Error);
  EXPECT_THROW(load_reports("/nonexistent/report.json"), Error);
  nlohmann::json j = to_json(sample("x", 1, 1));
  j["schema_version"] = 99;
  EXPECT_THROW(report_from_json(j), Error);
}

TEST(LatencyLog, Format) {
  std::ostringstream out;
  write_latency_log(out, {{0, 5, 93, workload::Op::Read}, {1, 6, 5406, workload::Op::Write}});
  EXPECT_EQ(out.str(), "seq,issue_us,complete_us,op\n0,5,93,R\n1,6,5406,W\n");
}
