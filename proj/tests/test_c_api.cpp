#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include <bkio/bench/datasets.hpp>
#include <bkio/c_api.h>

#include "support/support.hpp"

using bkio::testing::TempDir;

namespace {

struct DimuonFile {
    TempDir dir;
    std::filesystem::path path = dir.file("dimuon.bkio");

    DimuonFile()
    {
        bkio::bench::DimuonOptions o;
        o.events = 20000;
        o.spec = {bkio::Codec::lz4, 1};
        o.cluster_every = 5000;
        bkio::bench::generate_dimuon(path, o);
    }
};

} // namespace

TEST(CApi, OpenMissingFile)
{
    EXPECT_EQ(bkio_open("/no/such/file.bkio", 0, 0), nullptr);
    EXPECT_EQ(bkio_last_error_code(), BKIO_E_IO_FAILURE);
    EXPECT_NE(std::string(bkio_last_error()).find("file.bkio"), std::string::npos);
    EXPECT_EQ(bkio_open(nullptr, 0, 0), nullptr);
    EXPECT_EQ(bkio_last_error_code(), BKIO_E_INVALID_ARGUMENT);
}

TEST(CApi, NullHandlesAreDefinedErrors)
{
    EXPECT_LT(bkio_entry_count(nullptr), 0);
    EXPECT_EQ(bkio_last_error_code(), BKIO_E_INVALID_ARGUMENT);
    EXPECT_EQ(bkio_branch_name(nullptr, 0), nullptr);
    EXPECT_EQ(bkio_array_data(nullptr), nullptr);
    EXPECT_LT(bkio_evict(nullptr), 0);
    bkio_close(nullptr);
    bkio_array_free(nullptr);
}

TEST(CApi, SchemaAndCounts)
{
    DimuonFile f;
    auto* h = bkio_open(f.path.c_str(), 0, 0);
    ASSERT_NE(h, nullptr) << bkio_last_error();
    EXPECT_EQ(bkio_entry_count(h), 20000);
    ASSERT_EQ(bkio_branch_count(h), 4);
    const char* names[] = {"px", "py", "pz", "mass"};
    for (int i = 0; i < 4; ++i) {
        EXPECT_STREQ(bkio_branch_name(h, i), names[i]);
        EXPECT_EQ(bkio_branch_element(h, i), BKIO_F32);
        EXPECT_EQ(bkio_branch_shape(h, i), BKIO_SCALAR);
    }
    EXPECT_EQ(bkio_find_branch(h, "mass"), 3);
    EXPECT_LT(bkio_find_branch(h, "energy"), 0);
    EXPECT_EQ(bkio_last_error_code(), BKIO_E_OUT_OF_RANGE);
    EXPECT_EQ(bkio_branch_name(h, 9), nullptr);
    bkio_close(h);
}

TEST(CApi, ArraysAgreeWithPerEntry)
{
    DimuonFile f;
    auto* h = bkio_open(f.path.c_str(), 1, 2);
    ASSERT_NE(h, nullptr);
    const int32_t ids[] = {0, 1, 2, 3};
    double p_iter = 0;
    double e_iter = 0;
    double row[4];
    for (uint64_t e = 0; e < 20000; ++e) {
        ASSERT_EQ(bkio_get_entry_f64(h, ids, 4, e, row, 4), 4) << bkio_last_error();
        const double p2 = row[0] * row[0] + row[1] * row[1] + row[2] * row[2];
        p_iter += std::sqrt(p2);
        e_iter += std::sqrt(p2 + row[3] * row[3]);
    }
    EXPECT_EQ(bkio_get_entry_f64(h, ids, 4, 0, row, 3), -BKIO_E_SIZE_MISMATCH);

    for (int copy = 0; copy < 2; ++copy) {
        double p_arr = 0;
        double e_arr = 0;
        for (uint64_t begin = 0; begin < 20000; begin += 5000) {
            bkio_array* out[4];
            ASSERT_EQ(bkio_read_range(h, ids, 4, begin, begin + 5000, copy, out), 0) << bkio_last_error();
            const auto* px = static_cast<const float*>(bkio_array_data(out[0]));
            const auto* py = static_cast<const float*>(bkio_array_data(out[1]));
            const auto* pz = static_cast<const float*>(bkio_array_data(out[2]));
            const auto* m = static_cast<const float*>(bkio_array_data(out[3]));
            ASSERT_EQ(bkio_array_length(out[3]), 5000U);
            for (int i = 0; i < 5000; ++i) {
                const double p2 = double{px[i]} * px[i] + double{py[i]} * py[i] + double{pz[i]} * pz[i];
                p_arr += std::sqrt(p2);
                e_arr += std::sqrt(p2 + double{m[i]} * m[i]);
            }
            for (auto* a : out) {
                bkio_array_free(a);
            }
        }
        EXPECT_NEAR(p_arr, p_iter, 1e-5 * std::abs(p_iter));
        EXPECT_NEAR(e_arr, e_iter, 1e-5 * std::abs(e_iter));
    }
    bkio_close(h);
}

TEST(CApi, StaleViewReturnsNull)
{
    DimuonFile f;
    auto* h = bkio_open(f.path.c_str(), 0, 0);
    const int32_t ids[] = {0};
    bkio_array* view = nullptr;
    ASSERT_EQ(bkio_read_range(h, ids, 1, 0, 10, 0, &view), 0);
    bkio_array* copy = nullptr;
    ASSERT_EQ(bkio_read_range(h, ids, 1, 0, 10, 1, &copy), 0);
    EXPECT_EQ(bkio_array_is_view(view), 1);
    EXPECT_EQ(bkio_array_is_view(copy), 0);
    EXPECT_NE(bkio_array_data(view), nullptr);
    ASSERT_EQ(bkio_evict(h), 0);
    EXPECT_EQ(bkio_array_is_valid(view), 0);
    EXPECT_EQ(bkio_array_data(view), nullptr);
    EXPECT_EQ(bkio_last_error_code(), BKIO_E_STALE_VIEW);
    EXPECT_NE(bkio_array_data(copy), nullptr);
    bkio_array_free(view);
    bkio_array_free(copy);
    bkio_close(h);
}

TEST(CApi, BadRangeAndIds)
{
    DimuonFile f;
    auto* h = bkio_open(f.path.c_str(), 0, 0);
    const int32_t ids[] = {0};
    bkio_array* out = nullptr;
    EXPECT_EQ(bkio_read_range(h, ids, 1, 10, 20001, 0, &out), -BKIO_E_OUT_OF_RANGE);
    const int32_t bad[] = {-1};
    EXPECT_EQ(bkio_read_range(h, bad, 1, 0, 1, 0, &out), -BKIO_E_OUT_OF_RANGE);
    EXPECT_EQ(bkio_read_range(h, nullptr, 1, 0, 1, 0, &out), -BKIO_E_INVALID_ARGUMENT);
    bkio_close(h);
}
