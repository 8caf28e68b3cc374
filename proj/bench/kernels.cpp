// Serial reference against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "findingplaces/citygen/citygen.hpp"
#include "findingplaces/screening/screening.hpp"
#include "findingplaces/suitability/suitability.hpp"
#include "findingplaces/tangible/image.hpp"

using namespace findingplaces;

namespace {

const citygen::GeneratedCity& city() {
  static const auto c = [] {
    citygen::CitySpec spec;
    spec.seed = 42;
    spec.n_parcels = 1000;
    spec.layers = citygen::default_layer_plans();
    return citygen::generate_city(spec);
  }();
  return c;
}

const geo::ParcelSet& parcels() {
  static const auto set = geo::ParcelSet::build(city().parcels);
  return set;
}

std::vector<geo::PlanarPoint> points(std::size_t n) {
  const auto& b = parcels().bounds();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(b.min_x, b.max_x), uy(b.min_y, b.max_y);
  std::vector<geo::PlanarPoint> out(n);
  for (auto& p : out) p = {ux(rng), uy(rng)};
  return out;
}

template <auto Fn>
void BM_locate(benchmark::State& state) {
  const auto pts = points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(parcels(), pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_locate<geo::serial::locate_points>)->Name("locate_points/serial")->Arg(10'000)->Arg(100'000);
BENCHMARK(BM_locate<geo::parallel::locate_points>)->Name("locate_points/parallel")->Arg(10'000)->Arg(100'000);

template <auto Fn>
void BM_classify(benchmark::State& state) {
  const suitability::SuitabilityConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(parcels(), city().layers, cfg));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_classify<suitability::serial::classify_all>)->Name("classify_all/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_classify<suitability::parallel::classify_all>)->Name("classify_all/parallel")->Unit(benchmark::kMillisecond);

const tangible::Image& scan() {
  static const auto img = [] {
    const tangible::GridSpec spec;
    const auto table = tangible::LookupTable::default_table();
    std::mt19937_64 rng(3);
    auto image = tangible::render(tangible::paint(tangible::random_placements(rng, table, spec.rows, spec.cols, 30), table,
                                                  spec.rows, spec.cols, 0),
                                  spec);
    tangible::add_noise(image, 0.10, rng);
    return image;
  }();
  return img;
}

template <auto Fn>
void BM_quantize(benchmark::State& state) {
  const tangible::GridSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(scan(), spec, 0, {}));
}
BENCHMARK(BM_quantize<tangible::serial::quantize>)->Name("quantize/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_quantize<tangible::parallel::quantize>)->Name("quantize/parallel")->Unit(benchmark::kMicrosecond);

template <auto Fn>
void BM_screen(benchmark::State& state) {
  static const auto rules = screening::RuleSet::load(FP_SOURCE_DIR "/data/rules.json");
  static const auto sugg = screening::suggestions_from_json(screening::plant_campaign({}).suggestions);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(sugg, rules));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sugg.size()));
}
BENCHMARK(BM_screen<screening::serial::screen>)->Name("screen/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_screen<screening::parallel::screen>)->Name("screen/parallel")->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
