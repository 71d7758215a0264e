#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sssae/model.hpp"
#include "sssae/rng.hpp"
#include "sssae/tensor.hpp"

namespace sssae {

// A mini-batch of input views with per-example labels; label -1 means the
// example is unlabeled and contributes only to the reconstruction term.
struct Batch {
  std::vector<std::span<const double>> inputs;
  std::vector<std::int32_t> labels;

  std::size_t size() const { return inputs.size(); }
  std::size_t labeled_count() const;
};

// Switches describing which loss terms are active. The semi-supervised
// objective uses both paths; the supervised baseline disables
// reconstruction; a plain denoising autoencoder disables the classifier.
// sparsity_weight is an optional L1 penalty on the hidden code, off by
// default (the overcomplete layer plus corruption is what normally induces
// sparse codes).
struct LossOptions {
  double alpha = 1.0;
  double corruption_rate = 0.2;
  double sparsity_weight = 0.0;
  bool reconstruction = true;
  bool classifier = true;

  void validate() const;
};

struct LossBreakdown {
  double recon = 0.0;     // mean squared reconstruction error over the batch
  double classif = 0.0;   // mean cross-entropy over labeled examples (0 if none)
  double sparsity = 0.0;  // mean L1 norm of z (0 unless sparsity_weight != 0)
  double total = 0.0;     // recon + alpha * classif (+ sparsity_weight * sparsity)
  std::size_t labeled_count = 0;
  std::size_t total_count = 0;
};

// Partial derivatives of the batch loss, one array per parameter array.
struct Gradients {
  Matrix w_enc;
  Vec b_enc;
  Matrix w_dec;
  Vec b_dec;
  Matrix w_clf;
  Vec b_clf;

  static Gradients zeros(const ModelShape& shape);
};

// Flat views over the six arrays, in declaration order. Used by the SGD
// update, the finite-difference oracle and tests.
struct ParamView {
  const char* name;
  double* values;
  std::size_t size;
};
std::vector<ParamView> param_views(ModelParams& p);
std::vector<ParamView> grad_views(Gradients& g);

// ||x_clean - x_hat||^2. The target is always the uncorrupted input.
double reconstruction_loss(const Vec& x_clean, const Vec& x_hat);

// -log(h[label]), with the posterior floored at 1e-12 instead of erroring;
// each floored evaluation increments a diagnostics counter.
double classification_loss(const Vec& h, std::int32_t label);
std::uint64_t log_floor_hits();
void reset_log_floor_hits();

// Copies x, zeroing each coordinate independently with probability `rate`.
// One uniform draw is consumed per coordinate regardless of rate, so stream
// positions do not depend on the corruption setting.
Vec corrupt(const Vec& x, double rate, Rng& rng);
void corrupt_into(Vec& dst, std::span<const double> x, double rate, Rng& rng);

struct BatchEval {
  LossBreakdown loss;
  std::vector<ForwardCache> caches;
};

// Corrupts, encodes, decodes (and classifies labeled examples) every batch
// member, returning the averaged loss terms and the caches the backward
// pass needs. Reconstruction is averaged over the whole batch,
// cross-entropy over labeled examples only, so alpha keeps the same meaning
// whatever the labeled mix of a batch.
BatchEval batch_loss(const ModelParams& params, const Batch& batch,
                     const LossOptions& options, Rng& corruption_rng);

// Exact gradient of the batch loss. Unlabeled examples contribute nothing
// to the classifier arrays, and their encoder delta carries only the
// reconstruction term; when alpha is 0 the classifier path is skipped
// entirely, so the update degenerates to a plain denoising autoencoder.
Gradients backward(const ModelParams& params, const Batch& batch,
                   const std::vector<ForwardCache>& caches, const LossOptions& options);

// Central differences (f(t+d) - f(t-d)) / (t+d - (t-d)) over every scalar
// parameter of a black-box function. The denominator uses the achieved
// parameter difference to cancel step-representation error, and the
// subtraction runs in long double: with large alpha the loss carries a big
// constant term, and differencing it at double precision would drown the
// small per-parameter signal in rounding noise.
Gradients central_difference(ModelParams params, double step,
                             const std::function<long double(const ModelParams&)>& func);

// The oracle backward() is tested against: central differences of
// batch_loss with the corruption stream re-seeded identically for every
// perturbed evaluation.
Gradients finite_difference_gradient(const ModelParams& params, const Batch& batch,
                                     const LossOptions& options, double step,
                                     std::uint64_t corruption_seed);

// max over parameters of |a - b| / max(|a|, |b|, 1e-8); names the worst
// parameter array if `worst` is given.
double max_relative_gradient_error(Gradients& a, Gradients& b,
                                   std::string* worst = nullptr);

}  // namespace sssae
