#include <benchmark/benchmark.h>

#include "nrel/embedding.hpp"
#include "nrel/gmm.hpp"
#include "nrel/inversion.hpp"
#include "nrel/net.hpp"
#include "nrel/pipeline.hpp"
#include "nrel/schedule.hpp"

namespace {

using namespace nrel;

const NoiseSchedule& schedule() {
  static const NoiseSchedule sched = make_schedule(1000);
  return sched;
}

const StepPlan& plan50() {
  static const StepPlan plan = make_plan(50, schedule());
  return plan;
}

void bm_gmm_eval(benchmark::State& state) {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const Embedding e = encode_prompt(make_class_vocab(4, 16), {"class0"});
  const Vec z{0.7, -0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.eval(z, 500, e, schedule()));
  }
}
BENCHMARK(bm_gmm_eval);

void bm_gmm_grad(benchmark::State& state) {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const Embedding e = encode_prompt(make_class_vocab(4, 16), {"class0"});
  const Vec z{0.7, -0.3};
  const Vec upstream{1.0, -0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        backend.eval_grad_e(z, 500, e, schedule(), upstream));
  }
}
BENCHMARK(bm_gmm_grad);

void bm_net_eval(benchmark::State& state) {
  const NetBackend backend(make_net(2, 128, 8, 16, 1));
  const Embedding e = Embedding::zero(1, 16);
  const Vec z{0.7, -0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.eval(z, 500, e, schedule()));
  }
}
BENCHMARK(bm_net_eval);

void bm_net_grads(benchmark::State& state) {
  const NetBackend backend(make_net(2, 128, 8, 16, 1));
  const Embedding e = Embedding::zero(1, 16);
  const Vec z{0.7, -0.3};
  const Vec upstream{1.0, -0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(backend.grads(z, 500, e, upstream));
  }
}
BENCHMARK(bm_net_grads);

void bm_invert_50_steps(benchmark::State& state) {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const Embedding e = encode_prompt(make_class_vocab(4, 16), {"class0"});
  const Vec z0{1.9, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ddim_invert(z0, e, backend, schedule(), plan50()));
  }
}
BENCHMARK(bm_invert_50_steps);

void bm_null_text_invert(benchmark::State& state) {
  const GmmBackend backend(make_common_mean_gmm({2.0, 0.0}, 0.5, 0.5, 16));
  const Embedding e = encode_prompt(make_class_vocab(2, 16), {"class0"});
  const Vec z0{2.1, 0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(null_text_invert(z0, e, backend, schedule(),
                                              plan50(), 7.5, 10, 1e-2));
  }
}
BENCHMARK(bm_null_text_invert);

void bm_full_edit(benchmark::State& state) {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const PromptVocabulary vocab = make_class_vocab(4, 16);
  EditConfig cfg;
  cfg.opt_iterations = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(edit({1.9, 0.1}, {"class0"}, {"class1"}, vocab,
                                  backend, schedule(), cfg));
  }
}
BENCHMARK(bm_full_edit);

}  // namespace

BENCHMARK_MAIN();
