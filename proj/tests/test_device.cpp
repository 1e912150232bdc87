#include <gtest/gtest.h>

#include <vector>

#include "womv/device.hpp"
#include "womv/error.hpp"

using namespace womv;
using namespace womv::device;

namespace {

Geometry small_geometry() {
  Geometry g;
  g.num_pus = 4;
  g.chunks_per_pu = 4;
  g.pages_per_chunk = 8;
  g.page_size_bytes = 64;
  return g;
}

std::vector<std::uint8_t> filled(std::size_t n, std::uint8_t v) { return std::vector<std::uint8_t>(n, v); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Geometry, DefaultRig) {
  const Geometry g;
  EXPECT_EQ(g.cells_per_page(), 8192u);
  EXPECT_EQ(g.pages_per_eu(), 1600u);
  EXPECT_EQ(g.total_pages(), 256000u);
  EXPECT_EQ(g.capacity_bytes(), 256000ull * 4096);
}

TEST(Geometry, Validation) {
  Geometry g = small_geometry();
  g.num_pus = 0;
  EXPECT_EQ(code_of([&] { g.validate(); }), ErrorCode::ParameterOutOfRange);
  g = small_geometry();
  g.bits_per_cell = 3;
  EXPECT_EQ(code_of([&] { Device(g, LatencyModel::qlc_default()); }),
            ErrorCode::ParameterOutOfRange);
}

TEST(Latency, QlcTable) {
  const LatencyModel m = LatencyModel::qlc_default();
  EXPECT_EQ(m.read_latency(PageType::L), 88u);
  EXPECT_EQ(m.read_latency(PageType::CL), 104u);
  EXPECT_EQ(m.read_latency(PageType::CU), 120u);
  EXPECT_EQ(m.read_latency(PageType::U), 136u);
  EXPECT_EQ(m.write_latency(PageType::L), 1050u);
  EXPECT_EQ(m.write_latency(PageType::U), 5400u);
  EXPECT_EQ(m.erase_us, 2000u);
  EXPECT_EQ(m.page_type(5), PageType::CL);
  EXPECT_EQ(LatencyModel::mlc_default().page_type(5), PageType::CL);
  EXPECT_EQ(LatencyModel::mlc_default().page_type(6), PageType::L);
}

TEST(Device, IdleLatencies) {
  const Geometry g = small_geometry();
  const auto page = filled(g.page_size_bytes, 0x11);
  {
    Device d(g, LatencyModel::qlc_default());
    EXPECT_EQ(d.program_page({0, 0, 0}, page, {}, 0).completion, 1050u);
    EXPECT_EQ(d.read_page({1, 0, 0}, 0).completion, 88u);
  }
  {
    // Each type on its own PU so nothing queues. Gaps in a chunk are
    // allowed; only the order matters.
    Device d(g, LatencyModel::qlc_default());
    const Micros want[] = {1050, 2500, 3950, 5400};
    for (std::uint32_t p = 0; p < 4; ++p) {
      EXPECT_EQ(d.program_page({p, 0, p}, page, {}, 0).completion, want[p]);
    }
  }
  {
    Device d(g, LatencyModel::qlc_default());
    EXPECT_EQ(d.erase_eu(2, 0), 2000u);
    EXPECT_EQ(d.stats().eu_erases, 1u);
    EXPECT_EQ(d.stats().erases_per_eu[2], 1u);
  }
}

TEST(Device, PerPuQueueing) {
  const Geometry g = small_geometry();
  Device d(g, LatencyModel::qlc_default());
  const auto page = filled(g.page_size_bytes, 0x11);
  EXPECT_EQ(d.program_page({0, 0, 0}, page, {}, 0).completion, 1050u);
  EXPECT_EQ(d.program_page({0, 0, 1}, page, {}, 0).completion, 1050u + 2500u);
  EXPECT_EQ(d.program_page({1, 0, 0}, page, {}, 0).completion, 1050u);
  EXPECT_EQ(d.read_page({0, 0, 0}, 100).completion, 3550u + 88u);
  EXPECT_EQ(d.read_page({2, 0, 0}, 100).completion, 188u);
  // Erase waits for every PU.
  EXPECT_EQ(d.erase_eu(3, 0), 3638u + 2000u);
  EXPECT_EQ(d.makespan(), 3638u + 2000u);
}

TEST(Device, ProgramOrderAndMonotonicity) {
  const Geometry g = small_geometry();
  Device d(g, LatencyModel::qlc_default());
  auto page = filled(g.page_size_bytes, 0x22);
  d.program_page({0, 0, 3}, page, {}, 0);
  EXPECT_EQ(d.watermark(0, 0), 3);
  EXPECT_EQ(code_of([&] { d.program_page({0, 0, 3}, page, {}, 0); }),
            ErrorCode::OutOfOrderProgram);
  EXPECT_EQ(code_of([&] { d.program_page({0, 0, 1}, page, {}, 0); }),
            ErrorCode::OutOfOrderProgram);

  d.reopen_chunk_cycle(0);
  EXPECT_EQ(d.watermark(0, 0), -1);
  auto lower = page;
  lower[5] = 0x12;  // cell 11 goes 2 -> 1
  EXPECT_EQ(code_of([&] { d.program_page({0, 0, 3}, lower, {}, 0); }), ErrorCode::VoltageDecrease);
  try {
    d.program_page({0, 0, 3}, lower, {}, 0);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cell 11"), std::string::npos) << e.what();
  }
  auto higher = page;
  higher[5] = 0x32;
  d.program_page({0, 0, 3}, higher, {}, 0);
  EXPECT_EQ(d.peek({0, 0, 3})[5], 0x32);

  d.erase_eu(0, 0);
  EXPECT_EQ(d.peek({0, 0, 3})[5], 0);
  d.program_page({0, 0, 0}, lower, {}, 0);
}

TEST(Device, LevelCeilingAndSkips) {
  const Geometry g = small_geometry();
  Device d(g, LatencyModel::qlc_default());
  d.set_level_ceiling(14);
  auto page = filled(g.page_size_bytes, 0);
  page[0] = 0x0f;
  EXPECT_EQ(code_of([&] { d.program_page({0, 0, 0}, page, {}, 0); }),
            ErrorCode::ParameterOutOfRange);
  page[0] = 0x0e;
  const std::vector<std::uint32_t> skips{1};
  EXPECT_EQ(d.program_page({0, 0, 0}, page, skips, 0).skipped_count, 1u);
  d.reopen_chunk_cycle(0);
  auto bad = page;
  bad[0] = 0x1e;  // cell 1 is listed as skipped but changes
  EXPECT_EQ(code_of([&] { d.program_page({0, 0, 0}, bad, skips, 0); }),
            ErrorCode::ParameterOutOfRange);
}

TEST(Device, AddressChecks) {
  const Geometry g = small_geometry();
  Device d(g, LatencyModel::qlc_default());
  EXPECT_EQ(code_of([&] { d.read_page({4, 0, 0}, 0); }), ErrorCode::AddressOutOfRange);
  EXPECT_EQ(code_of([&] { d.read_page({0, 4, 0}, 0); }), ErrorCode::AddressOutOfRange);
  EXPECT_EQ(code_of([&] { d.read_page({0, 0, 8}, 0); }), ErrorCode::AddressOutOfRange);
  EXPECT_EQ(code_of([&] { d.erase_eu(4, 0); }), ErrorCode::AddressOutOfRange);
}

TEST(Device, MlcPreset) {
  Geometry g = small_geometry();
  g.bits_per_cell = 2;
  Device d(g, LatencyModel::mlc_default());
  const auto page = filled(g.page_size_bytes, 0xff);
  EXPECT_EQ(d.program_page({0, 0, 1}, page, {}, 0).completion, 2500u);
  EXPECT_EQ(d.geometry().cells_per_page(), 256u);
}
