#include "sssae/model.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "sssae/binio.hpp"
#include "sssae/error.hpp"

namespace sssae {

namespace {

constexpr char kCheckpointMagic[4] = {'S', 'S', 'A', 'E'};
constexpr std::uint8_t kCheckpointVersion = 1;

double glorot_radius(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void check_length(const Vec& v, std::size_t expected, const char* what) {
  if (v.size() != expected) {
    throw ShapeError(std::string(what) + ": expected length " +
                     std::to_string(expected) + ", got " + std::to_string(v.size()));
  }
}

}  // namespace

void ModelShape::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || num_classes == 0) {
    throw ConfigError("model shape dims must all be >= 1 (got input=" +
                      std::to_string(input_dim) + " hidden=" + std::to_string(hidden_dim) +
                      " classes=" + std::to_string(num_classes) + ")");
  }
}

ModelParams ModelParams::init(const ModelShape& shape, Rng& rng) {
  shape.validate();
  ModelParams p;
  p.shape = shape;
  p.w_enc = uniform_init(rng, shape.hidden_dim, shape.input_dim,
                         glorot_radius(shape.input_dim, shape.hidden_dim));
  p.b_enc.assign(shape.hidden_dim, 0.0);
  p.w_dec = uniform_init(rng, shape.input_dim, shape.hidden_dim,
                         glorot_radius(shape.hidden_dim, shape.input_dim));
  p.b_dec.assign(shape.input_dim, 0.0);
  p.w_clf = uniform_init(rng, shape.num_classes, shape.hidden_dim,
                         glorot_radius(shape.hidden_dim, shape.num_classes));
  p.b_clf.assign(shape.num_classes, 0.0);
  return p;
}

bool ModelParams::all_finite() const {
  return sssae::all_finite(w_enc) && sssae::all_finite(b_enc) &&
         sssae::all_finite(w_dec) && sssae::all_finite(b_dec) &&
         sssae::all_finite(w_clf) && sssae::all_finite(b_clf);
}

Vec encode(const ModelParams& params, const Vec& x) {
  check_length(x, params.shape.input_dim, "encode input");
  Vec z;
  affine_into(z, params.w_enc, x, &params.b_enc);
  tanh_inplace(z);
  return z;
}

Vec decode(const ModelParams& params, const Vec& z) {
  check_length(z, params.shape.hidden_dim, "decode input");
  Vec x_hat;
  affine_into(x_hat, params.w_dec, z, &params.b_dec);
  tanh_inplace(x_hat);
  return x_hat;
}

Vec classify(const ModelParams& params, const Vec& z) {
  check_length(z, params.shape.hidden_dim, "classify input");
  Vec logits;
  affine_into(logits, params.w_clf, z, &params.b_clf);
  return softmax(logits);
}

ForwardCache forward(const ModelParams& params, Vec x_corrupted, bool with_classifier) {
  ForwardCache cache;
  cache.z = encode(params, x_corrupted);
  cache.x_hat = decode(params, cache.z);
  if (with_classifier) cache.h = classify(params, cache.z);
  cache.x_corrupted = std::move(x_corrupted);
  return cache;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  io::write_magic(out, kCheckpointMagic, kCheckpointVersion);
  io::write_u64(out, params.shape.input_dim);
  io::write_u64(out, params.shape.hidden_dim);
  io::write_u64(out, params.shape.num_classes);
  io::write_f64_array(out, params.w_enc.data(), params.w_enc.size());
  io::write_f64_array(out, params.b_enc.data(), params.b_enc.size());
  io::write_f64_array(out, params.w_dec.data(), params.w_dec.size());
  io::write_f64_array(out, params.b_dec.data(), params.b_dec.size());
  io::write_f64_array(out, params.w_clf.data(), params.w_clf.size());
  io::write_f64_array(out, params.b_clf.data(), params.b_clf.size());
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  const std::uint8_t version = io::read_magic(in, kCheckpointMagic, "checkpoint");
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint " + path + ": unsupported version " +
                     std::to_string(version));
  }
  ModelParams p;
  p.shape.input_dim = io::read_u64(in);
  p.shape.hidden_dim = io::read_u64(in);
  p.shape.num_classes = io::read_u64(in);
  p.shape.validate();
  p.w_enc = Matrix(p.shape.hidden_dim, p.shape.input_dim);
  p.b_enc.resize(p.shape.hidden_dim);
  p.w_dec = Matrix(p.shape.input_dim, p.shape.hidden_dim);
  p.b_dec.resize(p.shape.input_dim);
  p.w_clf = Matrix(p.shape.num_classes, p.shape.hidden_dim);
  p.b_clf.resize(p.shape.num_classes);
  io::read_f64_array(in, p.w_enc.data(), p.w_enc.size());
  io::read_f64_array(in, p.b_enc.data(), p.b_enc.size());
  io::read_f64_array(in, p.w_dec.data(), p.w_dec.size());
  io::read_f64_array(in, p.b_dec.data(), p.b_dec.size());
  io::read_f64_array(in, p.w_clf.data(), p.w_clf.size());
  io::read_f64_array(in, p.b_clf.data(), p.b_clf.size());
  return p;
}

}  // namespace sssae
