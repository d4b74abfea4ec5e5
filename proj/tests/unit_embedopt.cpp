#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "nrel/embedding.hpp"
#include "nrel/embedopt.hpp"
#include "nrel/errors.hpp"
#include "nrel/gmm.hpp"
#include "nrel/net.hpp"
#include "nrel/schedule.hpp"
#include "test_support.hpp"

using namespace nrel;
using doctest::Approx;

namespace {

double mean_range(const Vec& curve, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += curve[i];
  return sum / static_cast<double>(end - begin);
}

}  // namespace

TEST_SUITE("embedopt") {

TEST_CASE("optimization echoes its settings and trains down") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const PromptVocabulary vocab = make_class_vocab(4, 16);
  const Embedding e_tgt = encode_prompt(vocab, {"class1"});
  const Vec x{2.0, 0.0};  // sits at the class-0 mode

  const double checksum_before = backend.spec().checksum();
  const OptimizationReport report =
      optimize_embedding(x, e_tgt, backend, sched, 200, 1e-2, 7);
  CHECK(report.iterations == 200);
  CHECK(report.seed == 7);
  CHECK(report.lr == 1e-2);
  REQUIRE(report.loss_curve.size() == 200);
  for (double v : report.loss_curve) CHECK(std::isfinite(v));

  // The adapted embedding explains the input better over time.
  const double head = mean_range(report.loss_curve, 0, 20);
  const double tail = mean_range(report.loss_curve, 180, 200);
  CHECK(tail < head);

  // The model itself is frozen throughout.
  CHECK(backend.spec().checksum() == checksum_before);

  CHECK(report.e_opt.n() == e_tgt.n());
  CHECK(report.e_opt.dim() == e_tgt.dim());
  CHECK_FALSE(nrel_test::bitwise_equal(report.e_opt.tokens, e_tgt.tokens));
}

TEST_CASE("zero iterations return the target embedding unchanged") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const PromptVocabulary vocab = make_class_vocab(4, 16);
  const Embedding e_tgt = encode_prompt(vocab, {"class2"});

  const OptimizationReport report =
      optimize_embedding({0.0, 2.0}, e_tgt, backend, sched, 0, 1e-2, 1);
  CHECK(nrel_test::bitwise_equal(report.e_opt.tokens, e_tgt.tokens));
  CHECK(report.loss_curve.empty());
}

TEST_CASE("optimization validates its inputs and backend") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, 16);
  CHECK_THROWS_AS(
      optimize_embedding({1.0, 0.0}, e, backend, sched, -1, 1e-2, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      optimize_embedding({1.0, 0.0}, e, backend, sched, 10, 1e-2, 0, 0),
      std::invalid_argument);

  const nrel_test::ConstBackend plain({0.0, 0.0});
  CHECK_THROWS_AS(
      optimize_embedding({1.0, 0.0}, e, plain, sched, 10, 1e-2, 0),
      UnsupportedBackendError);
}

TEST_CASE("optimization is a pure function of its seed") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const PromptVocabulary vocab = make_class_vocab(4, 16);
  const Embedding e_tgt = encode_prompt(vocab, {"class3"});
  const Vec x{1.4, 1.4};

  const OptimizationReport a =
      optimize_embedding(x, e_tgt, backend, sched, 50, 1e-2, 42);
  const OptimizationReport b =
      optimize_embedding(x, e_tgt, backend, sched, 50, 1e-2, 42);
  CHECK(nrel_test::bitwise_equal(a.e_opt.tokens, b.e_opt.tokens));
  CHECK(nrel_test::bitwise_equal(a.loss_curve, b.loss_curve));

  const OptimizationReport c =
      optimize_embedding(x, e_tgt, backend, sched, 50, 1e-2, 43);
  CHECK_FALSE(nrel_test::bitwise_equal(a.e_opt.tokens, c.e_opt.tokens));
}

TEST_CASE("batched draws average the objective") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const PromptVocabulary vocab = make_class_vocab(4, 16);
  const Embedding e_tgt = encode_prompt(vocab, {"class1"});

  const OptimizationReport report =
      optimize_embedding({2.0, 0.0}, e_tgt, backend, sched, 30, 1e-2, 5, 4);
  REQUIRE(report.loss_curve.size() == 30);
  for (double v : report.loss_curve) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("interpolation endpoints are exact and the blend is elementwise") {
  const Embedding e_tgt = Embedding::from_rows({{1.0, -2.0}, {0.5, 4.0}});
  const Embedding e_opt = Embedding::from_rows({{3.0, 6.0}, {-1.5, 2.0}});

  CHECK(nrel_test::bitwise_equal(interpolate(e_tgt, e_opt, 0.0).tokens,
                                 e_opt.tokens));
  CHECK(nrel_test::bitwise_equal(interpolate(e_tgt, e_opt, 1.0).tokens,
                                 e_tgt.tokens));

  const Embedding mid = interpolate(e_tgt, e_opt, 0.9);
  CHECK(mid.tokens[0][0] == Approx(0.9 * 1.0 + 0.1 * 3.0).epsilon(1e-15));
  CHECK(mid.tokens[1][1] == Approx(0.9 * 4.0 + 0.1 * 2.0).epsilon(1e-15));

  // Values outside [0, 1] extrapolate rather than clamp.
  const Embedding ext = interpolate(e_tgt, e_opt, 1.5);
  CHECK(ext.tokens[0][0] == Approx(1.5 * 1.0 - 0.5 * 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(interpolate(e_tgt, Embedding::zero(1, 2), 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      interpolate(e_tgt, e_opt, std::numeric_limits<double>::quiet_NaN()),
      std::invalid_argument);
}

TEST_CASE("model finetuning needs trainable parameters") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, 16);
  CHECK_THROWS_AS(imagic_finetune(backend, {1.0, 0.0}, e, sched, 10, 1e-3, 0),
                  UnsupportedBackendError);
  const NetBackend net_backend(make_net(2, 16, 4, 8, 3));
  CHECK_THROWS_AS(
      imagic_finetune(net_backend, {1.0, 0.0}, Embedding::zero(1, 8), sched,
                      -1, 1e-3, 0),
      std::invalid_argument);
}

TEST_CASE("model finetuning trains a copy and leaves the original intact") {
  const NetBackend backend(make_net(2, 32, 4, 8, 19));
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, 8);
  const Vec params_before = backend.net().params;

  const FinetuneResult ft =
      imagic_finetune(backend, {1.5, -0.5}, e, sched, 40, 1e-3, 11);
  REQUIRE(ft.loss_curve.size() == 40);
  CHECK(nrel_test::bitwise_equal(backend.net().params, params_before));
  CHECK_FALSE(nrel_test::bitwise_equal(ft.net.params, params_before));
  CHECK(ft.net.params.size() == params_before.size());

  const FinetuneResult again =
      imagic_finetune(backend, {1.5, -0.5}, e, sched, 40, 1e-3, 11);
  CHECK(nrel_test::bitwise_equal(again.net.params, ft.net.params));
  CHECK(nrel_test::bitwise_equal(again.loss_curve, ft.loss_curve));
}

}  // TEST_SUITE
