#include <benchmark/benchmark.h>

#include <random>

#include "lesionfuse/descriptors.hpp"
#include "lesionfuse/fusion.hpp"
#include "lesionfuse/reduce.hpp"
#include "lesionfuse/svm.hpp"

namespace {

using namespace lesionfuse;

ImageGray make_gray(std::size_t w, std::size_t h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    ImageGray img;
    img.width = w;
    img.height = h;
    img.px.resize(w * h);
    for (double& v : img.px) v = static_cast<double>(rng() % 256);
    return img;
}

void BM_ltp(benchmark::State& state) {
    const auto img = make_gray(static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(extract_ltp(img));
}
BENCHMARK(BM_ltp)->Arg(64)->Arg(128)->Arg(256);

void BM_clbp(benchmark::State& state) {
    const auto img = make_gray(static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(extract_clbp(img));
}
BENCHMARK(BM_clbp)->Arg(64)->Arg(128)->Arg(256);

void BM_lpq(benchmark::State& state) {
    const auto img = make_gray(128, 128, 3);
    LpqParams p;
    p.win_radius = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(extract_lpq(img, p));
}
BENCHMARK(BM_lpq)->Arg(1)->Arg(3)->Arg(5);

void BM_bsif(benchmark::State& state) {
    const auto img = make_gray(128, 128, 4);
    BsifConfig cfg;
    cfg.filter_size = static_cast<int>(state.range(0));
    cfg.bank = default_filter_bank(cfg.filter_size);
    for (auto _ : state) benchmark::DoNotOptimize(extract_bsif(img, cfg));
}
BENCHMARK(BM_bsif)->Arg(3)->Arg(7)->Arg(11);

void BM_hog(benchmark::State& state) {
    const auto img = make_gray(static_cast<std::size_t>(state.range(0)),
                               static_cast<std::size_t>(state.range(0)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(extract_hog(img));
}
BENCHMARK(BM_hog)->Arg(64)->Arg(256);

void BM_dct(benchmark::State& state) {
    std::mt19937 rng(6);
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    for (double& x : v) x = static_cast<double>(rng() % 1000) / 997.0;
    for (auto _ : state) benchmark::DoNotOptimize(dct_reduce(v, 4000));
}
BENCHMARK(BM_dct)->Arg(4096)->Arg(65536);

void BM_smo(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937 rng(7);
    Matrix X(n, 8);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = i % 2 == 0 ? 1 : -1;
        for (std::size_t c = 0; c < 8; ++c)
            X(i, c) = static_cast<double>(rng() % 1000) / 500.0 + (y[i] == 1 ? 1.0 : -1.0);
    }
    for (auto _ : state) benchmark::DoNotOptimize(train_binary(X, y, {10.0, 0.5}));
}
BENCHMARK(BM_smo)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
