#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "nrel/checkpoint.hpp"
#include "nrel/dataset.hpp"
#include "nrel/embedding.hpp"
#include "nrel/errors.hpp"
#include "nrel/gmm.hpp"
#include "nrel/net.hpp"
#include "nrel/rng.hpp"
#include "nrel/schedule.hpp"
#include "test_support.hpp"

using namespace nrel;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("backends") {

// ---------------------------------------------------------------------- rng

TEST_CASE("seeded rng reproduces its stream exactly") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 32; ++i) {
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform() == b.uniform());
    CHECK(a.uniform_int(97) == b.uniform_int(97));
  }
}

TEST_CASE("rng draws have sane ranges and moments") {
  Rng rng(7);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 4096;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double g = rng.normal();
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.08);
}

// ---------------------------------------------------- embeddings / prompts

TEST_CASE("embedding pools token rows by mean") {
  const Embedding e = Embedding::from_rows({{1.0, 3.0}, {3.0, -1.0}});
  CHECK(e.n() == 2);
  CHECK(e.dim() == 2);
  CHECK(e.pooled[0] == Approx(2.0).epsilon(1e-15));
  CHECK(e.pooled[1] == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("embedding construction validates rows") {
  CHECK_THROWS_AS(Embedding::from_rows({}), std::invalid_argument);
  CHECK_THROWS_AS(Embedding::from_rows({{1.0, 2.0}, {1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      Embedding::from_rows({{std::numeric_limits<double>::quiet_NaN()}}),
      std::invalid_argument);
}

TEST_CASE("repool tracks in-place row edits") {
  Embedding e = Embedding::zero(2, 3);
  e.tokens[0][1] = 6.0;
  e.repool();
  CHECK(e.pooled[1] == Approx(3.0).epsilon(1e-15));
  CHECK(e.pooled[0] == 0.0);
}

TEST_CASE("class vocabulary maps tokens to unit axes and null to zero") {
  const PromptVocabulary v = make_class_vocab(4, 16);
  REQUIRE(v.tokens.size() == 5);
  CHECK(v.tokens[4] == "");
  CHECK(v.table[1][1] == 1.0);
  CHECK(v.table[1][0] == 0.0);
  CHECK(sq_norm(v.table[4]) == 0.0);
  CHECK(v.find("class3") == 3);
  CHECK(v.find("absent") == -1);
}

TEST_CASE("prompt encoding looks up rows and rejects bad prompts") {
  const PromptVocabulary v = make_class_vocab(4, 16);
  const Embedding e = encode_prompt(v, {"class0", "class2"});
  CHECK(e.n() == 2);
  CHECK(e.pooled[0] == Approx(0.5).epsilon(1e-15));
  CHECK(e.pooled[2] == Approx(0.5).epsilon(1e-15));

  const Embedding null_e = encode_prompt(v, {""});
  CHECK(null_e.n() == 1);
  CHECK(sq_norm(null_e.pooled) == 0.0);

  CHECK_THROWS_AS(encode_prompt(v, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      encode_prompt(v, std::vector<std::string>(9, "class0")),
      std::invalid_argument);
  CHECK_THROWS_WITH_AS(encode_prompt(v, {"klass0"}),
                       "unknown token: \"klass0\"", UnknownTokenError);
}

TEST_CASE("random vocabulary is seeded and keeps the null row zero") {
  const PromptVocabulary a = make_random_vocab({"x", "y"}, 8, 3);
  const PromptVocabulary b = make_random_vocab({"x", "y"}, 8, 3);
  CHECK(nrel_test::bitwise_equal(a.table, b.table));
  CHECK(a.tokens.back() == "");
  CHECK(sq_norm(a.table.back()) == 0.0);
  const PromptVocabulary c = make_random_vocab({"x", "y"}, 8, 4);
  CHECK_FALSE(nrel_test::bitwise_equal(a.table[0], c.table[0]));
  CHECK_THROWS_AS(make_random_vocab({"x", "x"}, 8, 3),
                  std::invalid_argument);
}

// ------------------------------------------------------- analytic backend

TEST_CASE("circle mixture geometry") {
  const GMMSpec spec = make_circle_gmm(4, 2, 16);
  REQUIRE(spec.components() == 4);
  CHECK(spec.means[0][0] == Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(spec.means[1][0]) < 1e-14);
  CHECK(spec.means[1][1] == Approx(2.0).epsilon(1e-15));
  CHECK(spec.means[2][0] == Approx(-2.0).epsilon(1e-15));
  CHECK(spec.keys[3][3] == 8.0);
  CHECK_THROWS_AS(make_circle_gmm(4, 1, 16), std::invalid_argument);
  CHECK_THROWS_AS(make_circle_gmm(4, 2, 3), std::invalid_argument);
}

TEST_CASE("spec validation rejects malformed mixtures") {
  GMMSpec spec = make_circle_gmm(2, 2, 16);
  spec.sigmas[1] = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = make_circle_gmm(2, 2, 16);
  spec.means[1].push_back(0.0);
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = make_circle_gmm(2, 2, 16);
  spec.tau_w = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("standard-normal component predicts sqrt(1 - alpha_bar) * z") {
  const GmmBackend backend(nrel_test::make_std_normal_spec());
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, nrel_test::kKeyDim);
  Rng rng(4);
  for (int t : {1, 137, 500, 1000}) {
    const Vec z = rng.normal_vec(2);
    const Vec pred = backend.eval(z, t, e, sched);
    const double sv = std::sqrt(1.0 - sched.alpha_bar[t]);
    CHECK(pred[0] == Approx(sv * z[0]).epsilon(1e-12));
    CHECK(pred[1] == Approx(sv * z[1]).epsilon(1e-12));
  }
}

TEST_CASE("responsibilities are a distribution and follow proximity") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, 16);
  const Vec near0{1.9, 0.1};
  const Vec r = backend.responsibilities(near0, 10, e, sched);
  double sum = 0.0;
  for (double v : r) sum += v;
  CHECK(sum == Approx(1.0).epsilon(1e-12));
  CHECK(r[0] > 0.9);  // near component 0 at low noise
}

TEST_CASE("conditioning reweights the prior") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const PromptVocabulary v = make_class_vocab(4, 16);
  const Vec w0 = backend.cond_weights(encode_prompt(v, {""}));
  for (double wk : w0) CHECK(wk == Approx(0.25).epsilon(1e-12));
  const Vec w1 = backend.cond_weights(encode_prompt(v, {"class2"}));
  CHECK(w1[2] > 0.99);
}

TEST_CASE("alignment prefers the matching class") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const PromptVocabulary v = make_class_vocab(4, 16);
  const NoiseSchedule sched = make_schedule(1000);
  const Vec x{2.0, 0.0};
  const double own =
      backend.alignment(x, encode_prompt(v, {"class0"}), sched);
  const double other =
      backend.alignment(x, encode_prompt(v, {"class1"}), sched);
  CHECK(own > other);
}

TEST_CASE("analytic embedding gradient matches finite differences") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const NoiseSchedule sched = make_schedule(1000);
  CHECK(nrel_test::gmm_embedding_fd_max_err(backend, sched, 20, 91) < 1e-5);
}

TEST_CASE("evaluation counter tracks work and resets") {
  const GmmBackend backend(nrel_test::make_std_normal_spec());
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, nrel_test::kKeyDim);
  CHECK(backend.eval_count() == 0);
  backend.eval({0.1, 0.2}, 5, e, sched);
  backend.eval({0.1, 0.2}, 5, e, sched);
  CHECK(backend.eval_count() == 2);
  backend.reset_eval_count();
  CHECK(backend.eval_count() == 0);
}

TEST_CASE("seeded conditional draws follow the conditioned component") {
  const GmmBackend backend(make_circle_gmm(4, 2, 16));
  const PromptVocabulary v = make_class_vocab(4, 16);
  const Embedding e = encode_prompt(v, {"class1"});
  Rng rng(12);
  for (int i = 0; i < 8; ++i) {
    const Vec x = backend.sample_data(e, rng);
    CHECK(std::abs(x[0] - 0.0) < 2.5);  // component 1 sits at (0, 2)
    CHECK(std::abs(x[1] - 2.0) < 2.5);
  }
}

TEST_CASE("mixture variance closed forms") {
  // Modes at (+-8, 0) with sigma 0.25: per-dim average of
  // (8^2 + 0.25^2) and 0.25^2 is (64 + 0.125) / 2.
  CHECK(data_variance(nrel_test::make_separated_spec()) ==
        Approx(32.0625).epsilon(1e-12));
  CHECK(data_variance(make_circle_gmm(4, 2, 16)) ==
        Approx(2.25).epsilon(1e-12));
  CHECK(data_variance(nrel_test::make_std_normal_spec()) ==
        Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parameter checksum is order-sensitive and stable") {
  const GMMSpec a = make_circle_gmm(4, 2, 16);
  GMMSpec b = make_circle_gmm(4, 2, 16);
  CHECK(a.checksum() == b.checksum());
  b.means[0][0] += 1e-9;
  CHECK(a.checksum() != b.checksum());
}

// ------------------------------------------------------ trainable backend

TEST_CASE("time encoding interleaves sin and cos over a frequency ladder") {
  const Vec enc = time_encoding(0, 8);
  REQUIRE(enc.size() == 16);
  for (int i = 0; i < 8; ++i) {
    CHECK(enc[2 * i] == 0.0);
    CHECK(enc[2 * i + 1] == 1.0);
  }
  const Vec enc2 = time_encoding(3, 4);
  CHECK(enc2[0] == Approx(std::sin(3.0)).epsilon(1e-15));
  CHECK(enc2[1] == Approx(std::cos(3.0)).epsilon(1e-15));
  const double w1 = std::pow(10000.0, -0.25);
  CHECK(enc2[2] == Approx(std::sin(w1 * 3.0)).epsilon(1e-15));
}

TEST_CASE("fresh network is seeded, bounded, and well-shaped") {
  const DenoiserNet net = make_net(2, 64, 8, 16, 11);
  CHECK(net.params.size() == net.param_count());
  CHECK(net.input_dim() == 2 + 16 + 16);
  double max_abs = 0.0;
  for (double p : net.params) max_abs = std::max(max_abs, std::abs(p));
  CHECK(max_abs <= 1.0);
  CHECK(max_abs > 0.0);

  const DenoiserNet again = make_net(2, 64, 8, 16, 11);
  CHECK(nrel_test::bitwise_equal(net.params, again.params));

  const NetBackend backend(net);
  const NoiseSchedule sched = make_schedule(1000);
  Rng rng(2);
  for (int i = 0; i < 8; ++i) {
    const Vec out = backend.eval(rng.normal_vec(2), 500,
                                 Embedding::zero(1, 16), sched);
    CHECK(norm(out) <= 10.0);
  }
}

TEST_CASE("network validates input shapes") {
  const NetBackend backend(make_net(2, 16, 4, 8, 0));
  const NoiseSchedule sched = make_schedule(100);
  CHECK_THROWS_AS(
      backend.eval({1.0, 2.0, 3.0}, 5, Embedding::zero(1, 8), sched),
      std::invalid_argument);
  CHECK_THROWS_AS(backend.eval({1.0, 2.0}, 5, Embedding::zero(1, 4), sched),
                  std::invalid_argument);
}

TEST_CASE("network gradients match finite differences") {
  const NetBackend backend(make_net(2, 24, 4, 8, 21));
  const NoiseSchedule sched = make_schedule(1000);
  CHECK(nrel_test::net_fd_max_err(backend, sched, 20, 33) < 1e-4);
}

TEST_CASE("network alignment is deterministic and input-sensitive") {
  const NetBackend backend(make_net(2, 24, 4, 8, 21));
  const NoiseSchedule sched = make_schedule(1000);
  const Embedding e = Embedding::zero(1, 8);
  const double a1 = backend.alignment({0.5, -0.25}, e, sched);
  const double a2 = backend.alignment({0.5, -0.25}, e, sched);
  CHECK(a1 == a2);
  CHECK(a1 < 0.0);  // negative mean squared prediction error
}

// ----------------------------------------------------------------- dataset

TEST_CASE("dataset generation is labeled, seeded, and on-circle") {
  const Dataset d = generate_dataset(4, 2, 200, 5);
  REQUIRE(d.points.size() == 200);
  REQUIRE(d.labels.size() == 200);
  CHECK(d.D == 2);
  CHECK(d.K == 4);
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    CHECK(d.labels[i].rfind("class", 0) == 0);
    CHECK(norm(d.points[i]) < 5.0);  // radius 2, sigma 0.5
  }
  const Dataset again = generate_dataset(4, 2, 200, 5);
  CHECK(nrel_test::bitwise_equal(d.points, again.points));
  CHECK_THROWS_AS(generate_dataset(0, 2, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_dataset(4, 1, 10, 0), std::invalid_argument);
}

TEST_CASE("dataset file round trip is exact") {
  const fs::path path = temp_file("nrel_test_dataset.txt");
  const Dataset d = generate_dataset(3, 4, 50, 9);
  save_dataset(d, path);
  const Dataset back = load_dataset(path);
  CHECK(back.D == d.D);
  CHECK(back.K == d.K);
  CHECK(back.count == d.count);
  CHECK(back.seed == d.seed);
  CHECK(back.labels == d.labels);
  CHECK(nrel_test::bitwise_equal(back.points, d.points));
  fs::remove(path);
}

// -------------------------------------------------------------- checkpoint

TEST_CASE("vector and matrix checkpoints round trip bitwise") {
  const fs::path vp = temp_file("nrel_test_vec.bin");
  const Vec v{1.5, -2.25, 1.0 / 3.0, 4.0358297653756754e-05};
  save_vector(vp, v);
  CHECK(nrel_test::bitwise_equal(load_vector(vp), v));
  fs::remove(vp);

  const fs::path mp = temp_file("nrel_test_mat.bin");
  Rng rng(31);
  Mat m(5);
  for (auto& row : m) row = rng.normal_vec(3);
  save_matrix(mp, m);
  CHECK(nrel_test::bitwise_equal(load_matrix(mp), m));
  fs::remove(mp);
}

TEST_CASE("embedding checkpoints round trip with pooled rebuilt") {
  const fs::path ep = temp_file("nrel_test_emb.bin");
  Rng rng(41);
  const Embedding e = Embedding::from_rows({rng.normal_vec(6),
                                            rng.normal_vec(6)});
  save_embedding(ep, e);
  const Embedding back = load_embedding(ep);
  CHECK(nrel_test::bitwise_equal(back.tokens, e.tokens));
  CHECK(nrel_test::bitwise_equal(back.pooled, e.pooled));
  fs::remove(ep);

  const fs::path lp = temp_file("nrel_test_embl.bin");
  std::vector<Embedding> list{Embedding::zero(1, 4), Embedding::zero(1, 4)};
  list[1].tokens[0][2] = -7.5;
  list[1].repool();
  save_embedding_list(lp, list);
  const auto back_list = load_embedding_list(lp);
  REQUIRE(back_list.size() == 2);
  CHECK(nrel_test::bitwise_equal(back_list[1].tokens, list[1].tokens));
  fs::remove(lp);
}

TEST_CASE("network checkpoints round trip bitwise") {
  const fs::path np = temp_file("nrel_test_net.bin");
  const DenoiserNet net = make_net(2, 8, 4, 6, 77);
  save_net(np, net);
  const DenoiserNet back = load_net(np);
  CHECK(back.D == net.D);
  CHECK(back.H == net.H);
  CHECK(back.F == net.F);
  CHECK(back.d == net.d);
  CHECK(nrel_test::bitwise_equal(back.params, net.params));
  fs::remove(np);
}

TEST_CASE("vocabulary checkpoints round trip including the null token") {
  const fs::path vp = temp_file("nrel_test_vocab.txt");
  const PromptVocabulary v = make_random_vocab({"alpha", "beta"}, 8, 13);
  save_vocab(vp, v);
  const PromptVocabulary back = load_vocab(vp);
  CHECK(back.tokens == v.tokens);
  CHECK(back.seed == v.seed);
  CHECK(nrel_test::bitwise_equal(back.table, v.table));
  fs::remove(vp);
}

TEST_CASE("checkpoint loaders reject foreign files") {
  const fs::path bad = temp_file("nrel_test_bad.bin");
  {
    std::ofstream out(bad, std::ios::binary);
    out << "NOTAVEC 3\nxyz";
  }
  CHECK_THROWS_AS(load_vector(bad), std::invalid_argument);
  CHECK_THROWS_AS(load_net(bad), std::invalid_argument);
  fs::remove(bad);
}

}  // TEST_SUITE
