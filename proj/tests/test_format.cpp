#include <gtest/gtest.h>

#include <random>

#include <bkio/endian.hpp>
#include <bkio/error.hpp>
#include <bkio/format.hpp>
#include <bkio/io.hpp>

#include "test_support.hpp"

using namespace bkio;
using bkio::testing::code_of;

namespace {

using Bytes = std::vector<std::uint8_t>;

BranchDescriptor scalar_branch(BranchId id, std::string name)
{
    return {id, std::move(name), ElementKind::f32, BranchShape::scalar(), 32000};
}

/// Assembles header + records + footer from tables whose offsets get filled in.
Bytes assemble(FileTables tables, const std::vector<Bytes>& payloads)
{
    Bytes file = encode_file_header(1);
    for (std::size_t i = 0; i < tables.baskets.size(); ++i) {
        tables.baskets[i].file_offset = file.size();
        const auto rec = encode_basket_record(tables.baskets[i], payloads[i]);
        file.insert(file.end(), rec.begin(), rec.end());
    }
    const auto footer = encode_footer(tables, file.size());
    file.insert(file.end(), footer.begin(), footer.end());
    return file;
}

FileTables one_basket_tables()
{
    FileTables t;
    t.branches = {scalar_branch(0, "x")};
    t.baskets = {{0, 0, 1000, 0, 4000, 4000, {Codec::none, 0}}};
    t.clusters.boundaries = {1000};
    t.total_entries = 1000;
    return t;
}

} // namespace

TEST(FileHeader, VersionOneBytes)
{
    EXPECT_EQ(encode_file_header(1), (Bytes{0x42, 0x4B, 0x49, 0x4F, 0, 0, 0, 1, 0, 0, 0, 0}));
}

TEST(FileHeader, OtherVersionsRejected)
{
    EXPECT_EQ(code_of([] { (void)encode_file_header(2); }), ErrorCode::unsupported_version);
    auto bytes = encode_file_header(1);
    bytes[7] = 2;
    EXPECT_EQ(code_of([&] { (void)decode_file_header(bytes); }), ErrorCode::unsupported_version);
}

TEST(FileHeader, RoundTrip) { EXPECT_EQ(decode_file_header(encode_file_header(1)), 1U); }

TEST(FileHeader, BadMagic)
{
    auto bytes = encode_file_header(1);
    bytes[0] = 'X';
    EXPECT_EQ(code_of([&] { (void)decode_file_header(bytes); }), ErrorCode::bad_magic);
}

TEST(BasketRecord, HeaderLayout)
{
    const BasketMeta m{0, 0, 1, 0, 4, 4, {Codec::none, 0}};
    const Bytes payload{1, 2, 3, 4};
    const auto rec = encode_basket_record(m, payload);
    ASSERT_EQ(rec.size(), 30U);
    EXPECT_EQ(basket_record_header_size, 26U);
    EXPECT_EQ(Bytes(rec.end() - 4, rec.end()), payload);
}

TEST(BasketRecord, FieldsAreBigEndian)
{
    const BasketMeta m{0x01020304, 0x0A0B0C0D0E0F1011, 7, 0, 3, 9, {Codec::lz4hc, 12}};
    const auto rec = encode_basket_record(m, Bytes{9, 9, 9});
    EXPECT_EQ(Bytes(rec.begin(), rec.begin() + 4), (Bytes{1, 2, 3, 4}));
    EXPECT_EQ(Bytes(rec.begin() + 4, rec.begin() + 12), (Bytes{0x0A, 0x0B, 0x0C, 0x0D, 0x0E, 0x0F, 0x10, 0x11}));
    EXPECT_EQ(Bytes(rec.begin() + 12, rec.begin() + 16), (Bytes{0, 0, 0, 7}));
    EXPECT_EQ(rec[16], 3);  // lz4hc
    EXPECT_EQ(rec[17], 12);
    EXPECT_EQ(Bytes(rec.begin() + 18, rec.begin() + 22), (Bytes{0, 0, 0, 9}));
    EXPECT_EQ(Bytes(rec.begin() + 22, rec.begin() + 26), (Bytes{0, 0, 0, 3}));
}

TEST(BasketRecord, PayloadSizeMustMatch)
{
    const BasketMeta m{0, 0, 1, 0, 4, 4, {Codec::none, 0}};
    EXPECT_EQ(code_of([&] { (void)encode_basket_record(m, Bytes{1, 2, 3}); }), ErrorCode::size_mismatch);
}

TEST(BasketRecord, RandomRoundTrip)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        BasketMeta m;
        m.branch_id = static_cast<BranchId>(rng());
        m.first_entry = rng();
        m.entry_count = static_cast<std::uint32_t>(rng() % 100000) + 1;
        const Codec codecs[] = {Codec::deflate, Codec::lz4, Codec::lz4hc};
        m.spec = {codecs[rng() % 3], 1};
        m.uncompressed_size = static_cast<std::uint32_t>(rng());
        m.compressed_size = static_cast<std::uint32_t>(rng() % 200);
        Bytes payload(m.compressed_size);
        for (auto& b : payload) {
            b = static_cast<std::uint8_t>(rng());
        }
        const auto rec = encode_basket_record(m, payload);
        const auto back = decode_basket_record(rec);
        EXPECT_EQ(back.meta, m);
        EXPECT_EQ(Bytes(back.payload.begin(), back.payload.end()), payload);
    }
}

TEST(Footer, EmptyTables)
{
    const auto file = assemble({}, {});
    MemorySource src(file);
    const auto t = decode_file(src);
    EXPECT_EQ(t, FileTables{});
}

TEST(Footer, OneBasketRoundTrip)
{
    const auto tables = one_basket_tables();
    const auto file = assemble(tables, {Bytes(4000, 7)});
    MemorySource src(file);
    auto expected = tables;
    expected.baskets[0].file_offset = file_header_size;
    EXPECT_EQ(decode_file(src), expected);
}

TEST(Footer, TrailerLocatesFooter)
{
    const auto file = assemble(one_basket_tables(), {Bytes(4000, 7)});
    const auto n = file.size();
    EXPECT_EQ(Bytes(file.end() - 4, file.end()), (Bytes{'B', 'K', 'I', 'O'}));
    const auto footer_offset = load_be<std::uint64_t>(file.data() + n - trailer_size);
    EXPECT_EQ(footer_offset, file_header_size + basket_record_header_size + 4000);
}

TEST(Footer, UndefinedBranchRejected)
{
    auto t = one_basket_tables();
    t.baskets[0].branch_id = 3;
    EXPECT_EQ(code_of([&] { (void)encode_footer(t, 100); }), ErrorCode::invalid_index);
}

TEST(Footer, MissingBasketAtClusterBoundaryRejected)
{
    FileTables t;
    t.branches = {scalar_branch(0, "x")};
    t.baskets = {{0, 0, 1000, 0, 4000, 4000, {}}};
    t.clusters.boundaries = {500, 1000};
    t.total_entries = 1000;
    EXPECT_EQ(code_of([&] { validate_tables(t); }), ErrorCode::invalid_index);
}

TEST(Footer, GapBetweenBasketsRejected)
{
    FileTables t;
    t.branches = {scalar_branch(0, "x")};
    t.baskets = {{0, 0, 10, 0, 40, 40, {}}, {0, 11, 9, 0, 36, 36, {}}};
    t.clusters.boundaries = {20};
    t.total_entries = 20;
    EXPECT_EQ(code_of([&] { validate_tables(t); }), ErrorCode::invalid_index);
}

TEST(Footer, DuplicateNamesRejected)
{
    FileTables t;
    t.branches = {scalar_branch(0, "x"), scalar_branch(1, "x")};
    EXPECT_EQ(code_of([&] { validate_tables(t); }), ErrorCode::invalid_index);
}

TEST(DecodeFile, CorruptTrailerMagic)
{
    auto file = assemble(one_basket_tables(), {Bytes(4000, 7)});
    file.back() = 'X';
    MemorySource src(file);
    EXPECT_EQ(code_of([&] { (void)decode_file(src); }), ErrorCode::bad_trailer);
}

TEST(DecodeFile, TruncatedMidPayload)
{
    auto file = assemble(one_basket_tables(), {Bytes(4000, 7)});
    file.resize(file_header_size + basket_record_header_size + 1000);
    MemorySource src(file);
    EXPECT_EQ(code_of([&] { (void)decode_file(src); }), ErrorCode::truncated);
}

TEST(DecodeFile, TruncatedInsideFooter)
{
    auto file = assemble(one_basket_tables(), {Bytes(4000, 7)});
    file.resize(file.size() - 20);
    MemorySource src(file);
    EXPECT_EQ(code_of([&] { (void)decode_file(src); }), ErrorCode::truncated);
}

TEST(DecodeFile, BadHeaderMagic)
{
    auto file = assemble(one_basket_tables(), {Bytes(4000, 7)});
    file[1] = 0;
    MemorySource src(file);
    EXPECT_EQ(code_of([&] { (void)decode_file(src); }), ErrorCode::bad_magic);
}

TEST(DecodeFile, FooterOffsetOutOfBounds)
{
    auto file = assemble(one_basket_tables(), {Bytes(4000, 7)});
    store_be<std::uint64_t>(file.data() + file.size() - trailer_size, file.size() + 5);
    MemorySource src(file);
    EXPECT_EQ(code_of([&] { (void)decode_file(src); }), ErrorCode::invalid_index);
}

TEST(DecodeFile, TooShortForHeaderAndTrailer)
{
    const Bytes file = encode_file_header(1);
    MemorySource src(file);
    EXPECT_EQ(code_of([&] { (void)decode_file(src); }), ErrorCode::truncated);
}
