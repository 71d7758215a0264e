#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "sssae/error.hpp"
#include "sssae/model.hpp"

using namespace sssae;

namespace {

ModelParams zero_params(const ModelShape& shape) {
  ModelParams p;
  p.shape = shape;
  p.w_enc = Matrix(shape.hidden_dim, shape.input_dim);
  p.b_enc.assign(shape.hidden_dim, 0.0);
  p.w_dec = Matrix(shape.input_dim, shape.hidden_dim);
  p.b_dec.assign(shape.input_dim, 0.0);
  p.w_clf = Matrix(shape.num_classes, shape.hidden_dim);
  p.b_clf.assign(shape.num_classes, 0.0);
  return p;
}

ModelParams random_params(const ModelShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  return ModelParams::init(shape, rng);
}

}  // namespace

TEST_CASE("shape validation and overcompleteness") {
  CHECK_THROWS_AS((ModelShape{0, 4, 2}.validate()), ConfigError);
  CHECK(ModelShape{4, 10, 2}.overcomplete());
  CHECK_FALSE(ModelShape{10, 4, 2}.overcomplete());
}

TEST_CASE("encode basics") {
  const ModelShape shape{3, 5, 2};
  const ModelParams zeros = zero_params(shape);
  CHECK(encode(zeros, Vec{1.0, -2.0, 0.5}) == Vec(5, 0.0));

  ModelParams scalar = zero_params(ModelShape{1, 1, 2});
  scalar.w_enc(0, 0) = 1.0;
  const Vec z = encode(scalar, Vec{1.0});
  CHECK(z[0] == doctest::Approx(0.761594).epsilon(1e-6));

  const ModelParams p = random_params(shape, 9);
  const Vec out = encode(p, Vec{0.3, 0.9, -0.4});
  for (const double v : out) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }

  CHECK_THROWS_AS(encode(p, Vec{1.0}), ShapeError);
}

TEST_CASE("decode basics") {
  ModelParams p = zero_params(ModelShape{1, 2, 2});
  CHECK(decode(p, Vec{0.0, 0.0}) == Vec{0.0});

  p.w_dec(0, 0) = 1.0;
  p.w_dec(0, 1) = -1.0;
  CHECK(decode(p, Vec{0.5, 0.5}) == Vec{0.0});  // cancellation, then tanh(0)

  CHECK_THROWS_AS(decode(p, Vec{1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("classify basics") {
  const ModelShape shape{2, 3, 4};
  const ModelParams zeros = zero_params(shape);
  const Vec h = classify(zeros, Vec{0.1, 0.2, 0.3});
  for (const double p : h) CHECK(p == 0.25);

  // logits [1,2,3] through the bias terms
  ModelParams biased = zero_params(ModelShape{2, 3, 3});
  biased.b_clf = {1.0, 2.0, 3.0};
  const Vec posterior = classify(biased, Vec{0.0, 0.0, 0.0});
  CHECK(posterior[0] == doctest::Approx(0.090031).epsilon(1e-5));
  CHECK(posterior[1] == doctest::Approx(0.244728).epsilon(1e-5));
  CHECK(posterior[2] == doctest::Approx(0.665241).epsilon(1e-5));

  double total = 0.0;
  for (const double p : posterior) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forward runs the three paths off one code") {
  const ModelShape shape{4, 6, 3};
  const ModelParams p = random_params(shape, 21);
  const Vec x{0.1, -0.2, 0.3, -0.4};

  ForwardCache no_clf = forward(p, x, false);
  CHECK(no_clf.h.empty());
  CHECK(no_clf.z.size() == shape.hidden_dim);
  CHECK(no_clf.x_hat.size() == shape.input_dim);

  ForwardCache with_clf = forward(p, x, true);
  double total = 0.0;
  for (const double v : with_clf.h) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(bitwise_equal(with_clf.z, encode(p, x)));
  CHECK(bitwise_equal(with_clf.x_hat, decode(p, with_clf.z)));
}

TEST_CASE("decoder and classifier are parallel paths") {
  const ModelShape shape{4, 6, 3};
  const ModelParams base = random_params(shape, 33);
  const Vec x{0.5, -0.5, 0.25, -0.25};
  const ForwardCache before = forward(base, x, true);

  ModelParams dec_perturbed = base;
  dec_perturbed.w_dec(0, 0) += 10.0;
  const ForwardCache after_dec = forward(dec_perturbed, x, true);
  CHECK(bitwise_equal(after_dec.h, before.h));
  CHECK_FALSE(bitwise_equal(after_dec.x_hat, before.x_hat));

  ModelParams clf_perturbed = base;
  clf_perturbed.w_clf(0, 0) += 10.0;
  const ForwardCache after_clf = forward(clf_perturbed, x, true);
  CHECK(bitwise_equal(after_clf.x_hat, before.x_hat));
  CHECK_FALSE(bitwise_equal(after_clf.h, before.h));
}

TEST_CASE("initialization bounds and zero biases") {
  const ModelShape shape{10, 20, 5};
  const ModelParams p = random_params(shape, 5);
  const double r_enc = std::sqrt(6.0 / (10 + 20));
  for (std::size_t i = 0; i < p.w_enc.size(); ++i) {
    CHECK(std::abs(p.w_enc.data()[i]) <= r_enc);
  }
  for (const double b : p.b_enc) CHECK(b == 0.0);
  for (const double b : p.b_dec) CHECK(b == 0.0);
  for (const double b : p.b_clf) CHECK(b == 0.0);
  CHECK(p.all_finite());
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  const ModelShape shape{5, 9, 4};
  const ModelParams p = random_params(shape, 1234);
  const char* path = "model_roundtrip.ckpt";
  save_checkpoint(p, path);
  const ModelParams q = load_checkpoint(path);

  CHECK(q.shape == p.shape);
  CHECK(bitwise_equal(q.w_enc, p.w_enc));
  CHECK(bitwise_equal(q.b_enc, p.b_enc));
  CHECK(bitwise_equal(q.w_dec, p.w_dec));
  CHECK(bitwise_equal(q.b_dec, p.b_dec));
  CHECK(bitwise_equal(q.w_clf, p.w_clf));
  CHECK(bitwise_equal(q.b_clf, p.b_clf));
  std::remove(path);
}

TEST_CASE("checkpoint with a bad magic tag is rejected") {
  const char* path = "model_badmagic.ckpt";
  FILE* f = std::fopen(path, "wb");
  std::fputs("NOPE", f);
  std::fclose(f);
  CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  std::remove(path);
}
