#pragma once

#include <cstdint>
#include <string>

#include "sssae/rng.hpp"
#include "sssae/tensor.hpp"

namespace sssae {

// Layer dimensions. The interesting regime is overcomplete: the hidden code
// is wider than the input, so structure shows up as a few strongly active
// units rather than a compressed bottleneck.
struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;

  bool overcomplete() const { return hidden_dim >= input_dim; }
  void validate() const;  // each dim >= 1

  bool operator==(const ModelShape&) const = default;
};

// The six learnable arrays. Encoder and decoder weights are independent
// parameters; nothing ever ties w_dec to the transpose of w_enc.
struct ModelParams {
  ModelShape shape;
  Matrix w_enc;  // hidden x input
  Vec b_enc;     // hidden
  Matrix w_dec;  // input x hidden
  Vec b_dec;     // input
  Matrix w_clf;  // classes x hidden
  Vec b_clf;     // classes

  // Weights uniform in [-r, +r] with r = sqrt(6 / (fan_in + fan_out)),
  // biases zero. Keeps tanh units in their linear range at the start.
  static ModelParams init(const ModelShape& shape, Rng& rng);

  bool all_finite() const;
};

// Activations retained for the backward pass. h stays empty when the
// classifier path is skipped.
struct ForwardCache {
  Vec x_corrupted;
  Vec z;
  Vec x_hat;
  Vec h;
};

// z = tanh(w_enc * x + b_enc)
Vec encode(const ModelParams& params, const Vec& x);

// x_hat = tanh(w_dec * z + b_dec)
Vec decode(const ModelParams& params, const Vec& z);

// h = softmax(w_clf * z + b_clf)
Vec classify(const ModelParams& params, const Vec& z);

// Runs encoder, decoder and (optionally) classifier on one corrupted input.
// Decoder and classifier both consume the same hidden code z.
ForwardCache forward(const ModelParams& params, Vec x_corrupted, bool with_classifier);

// Checkpoint container: 4-byte magic "SSAE", a version byte, the three
// dimensions as little-endian u64, then the six arrays in declaration order
// as little-endian f64. Round-trips are bit-exact.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace sssae
