#include <filesystem>
#include <vector>

#include <benchmark/benchmark.h>

#include <bkio/bench/datasets.hpp>
#include <bkio/codec.hpp>
#include <bkio/deserialize.hpp>
#include <bkio/reader.hpp>

namespace {

std::vector<std::uint8_t> sample_bytes(std::size_t floats)
{
    return bkio::encode_elements(bkio::NativeArray(bkio::bench::sweep_values(floats, 7)));
}

bkio::CompressionSpec spec_arg(const benchmark::State& state)
{
    return {static_cast<bkio::Codec>(state.range(0)), static_cast<std::uint8_t>(state.range(1))};
}

void BM_Compress(benchmark::State& state)
{
    const auto bytes = sample_bytes(32 * 1024);
    const auto spec = spec_arg(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bkio::compress(bytes, spec));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}

void BM_Decompress(benchmark::State& state)
{
    const auto bytes = sample_bytes(32 * 1024);
    const auto frame = bkio::compress(bytes, spec_arg(state));
    std::vector<std::uint8_t> out(bytes.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(bkio::decompress_into(frame.bytes, frame.stored_as, out));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}

#define CODEC_ARGS Args({0, 0})->Args({1, 1})->Args({1, 6})->Args({2, 1})->Args({3, 9})
BENCHMARK(BM_Compress)->CODEC_ARGS;
BENCHMARK(BM_Decompress)->CODEC_ARGS;

void BM_DecodeElements(benchmark::State& state)
{
    const auto bytes = sample_bytes(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bkio::decode_elements(bytes, bkio::ElementKind::f32));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_DecodeElements)->Arg(1024)->Arg(64 * 1024);

class DimuonFile : public benchmark::Fixture {
public:
    void SetUp(const benchmark::State&) override
    {
        if (!std::filesystem::exists(path)) {
            bkio::bench::DimuonOptions options;
            options.events = 200'000;
            bkio::bench::generate_dimuon(path, options);
        }
    }

    std::filesystem::path path = std::filesystem::temp_directory_path() / "bkio_micro_dimuon.bkio";
};

BENCHMARK_F(DimuonFile, PerEntry)(benchmark::State& state)
{
    for (auto _ : state) {
        auto reader = bkio::Reader::open(path);
        double sum = 0;
        for (bkio::EntryIndex e = 0; e < reader.total_entries(); ++e) {
            sum += reader.get_entry({0}, e).scalar<float>(0);
        }
        benchmark::DoNotOptimize(sum);
    }
}

BENCHMARK_F(DimuonFile, BulkDecoded)(benchmark::State& state)
{
    for (auto _ : state) {
        auto reader = bkio::Reader::open(path);
        double sum = 0;
        for (std::size_t k = 0; k < reader.basket_count(0); ++k) {
            for (const float v : reader.read_basket_bulk(0, k, bkio::DeliveryMode::decoded_native).values<float>()) {
                sum += v;
            }
        }
        benchmark::DoNotOptimize(sum);
    }
}

} // namespace
BENCHMARK_MAIN();
