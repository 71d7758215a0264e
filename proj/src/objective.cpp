#include "sssae/objective.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "sssae/error.hpp"
#include "sssae/kernels.hpp"

namespace sssae {

namespace {

constexpr double kLogFloor = 1e-12;

std::atomic<std::uint64_t> g_log_floor_hits{0};

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::size_t Batch::labeled_count() const {
  std::size_t n = 0;
  for (const std::int32_t label : labels) {
    if (label >= 0) ++n;
  }
  return n;
}

void LossOptions::validate() const {
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (corruption_rate < 0.0 || corruption_rate > 1.0) {
    throw ConfigError("corruption rate must lie in [0, 1]");
  }
  if (sparsity_weight < 0.0) throw ConfigError("sparsity weight must be >= 0");
  if (!reconstruction && !classifier) {
    throw ConfigError("at least one of the loss paths must be enabled");
  }
}

Gradients Gradients::zeros(const ModelShape& shape) {
  Gradients g;
  g.w_enc = Matrix(shape.hidden_dim, shape.input_dim);
  g.b_enc.assign(shape.hidden_dim, 0.0);
  g.w_dec = Matrix(shape.input_dim, shape.hidden_dim);
  g.b_dec.assign(shape.input_dim, 0.0);
  g.w_clf = Matrix(shape.num_classes, shape.hidden_dim);
  g.b_clf.assign(shape.num_classes, 0.0);
  return g;
}

std::vector<ParamView> param_views(ModelParams& p) {
  return {
      {"w_enc", p.w_enc.data(), p.w_enc.size()},
      {"b_enc", p.b_enc.data(), p.b_enc.size()},
      {"w_dec", p.w_dec.data(), p.w_dec.size()},
      {"b_dec", p.b_dec.data(), p.b_dec.size()},
      {"w_clf", p.w_clf.data(), p.w_clf.size()},
      {"b_clf", p.b_clf.data(), p.b_clf.size()},
  };
}

std::vector<ParamView> grad_views(Gradients& g) {
  return {
      {"w_enc", g.w_enc.data(), g.w_enc.size()},
      {"b_enc", g.b_enc.data(), g.b_enc.size()},
      {"w_dec", g.w_dec.data(), g.w_dec.size()},
      {"b_dec", g.b_dec.data(), g.b_dec.size()},
      {"w_clf", g.w_clf.data(), g.w_clf.size()},
      {"b_clf", g.b_clf.data(), g.b_clf.size()},
  };
}

double reconstruction_loss(const Vec& x_clean, const Vec& x_hat) {
  return squared_distance(x_clean, x_hat);
}

double classification_loss(const Vec& h, std::int32_t label) {
  if (label < 0 || static_cast<std::size_t>(label) >= h.size()) {
    throw IntegrityError("class label " + std::to_string(label) +
                         " out of range for posterior of length " +
                         std::to_string(h.size()));
  }
  double p = h[static_cast<std::size_t>(label)];
  if (p < kLogFloor) {
    p = kLogFloor;
    g_log_floor_hits.fetch_add(1, std::memory_order_relaxed);
  }
  return -std::log(p);
}

std::uint64_t log_floor_hits() {
  return g_log_floor_hits.load(std::memory_order_relaxed);
}

void reset_log_floor_hits() { g_log_floor_hits.store(0, std::memory_order_relaxed); }

void corrupt_into(Vec& dst, std::span<const double> x, double rate, Rng& rng) {
  dst.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    dst[i] = rng.next_double() < rate ? 0.0 : x[i];
  }
}

Vec corrupt(const Vec& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate > 1.0) throw ConfigError("corruption rate must lie in [0, 1]");
  Vec out;
  corrupt_into(out, x, rate, rng);
  return out;
}

BatchEval batch_loss(const ModelParams& params, const Batch& batch,
                     const LossOptions& options, Rng& corruption_rng) {
  options.validate();
  if (batch.size() == 0) throw ConfigError("batch is empty");
  if (batch.labels.size() != batch.inputs.size()) {
    throw IntegrityError("batch has " + std::to_string(batch.inputs.size()) +
                         " inputs but " + std::to_string(batch.labels.size()) +
                         " labels");
  }

  BatchEval eval;
  eval.caches.reserve(batch.size());

  double recon_sum = 0.0;
  double classif_sum = 0.0;
  double sparsity_sum = 0.0;
  std::size_t labeled = 0;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::span<const double> x = batch.inputs[i];
    ForwardCache cache;
    corrupt_into(cache.x_corrupted, x, options.corruption_rate, corruption_rng);
    cache.z = encode(params, cache.x_corrupted);

    if (options.reconstruction) {
      cache.x_hat = decode(params, cache.z);
      double d = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - cache.x_hat[k];
        d += diff * diff;
      }
      recon_sum += d;
    }
    if (options.classifier && batch.labels[i] >= 0) {
      cache.h = classify(params, cache.z);
      classif_sum += classification_loss(cache.h, batch.labels[i]);
      ++labeled;
    }
    if (options.sparsity_weight != 0.0) {
      for (const double zk : cache.z) sparsity_sum += std::abs(zk);
    }
    eval.caches.push_back(std::move(cache));
  }

  const double p = static_cast<double>(batch.size());
  LossBreakdown& loss = eval.loss;
  loss.total_count = batch.size();
  loss.labeled_count = labeled;
  loss.recon = options.reconstruction ? recon_sum / p : 0.0;
  loss.classif = labeled > 0 ? classif_sum / static_cast<double>(labeled) : 0.0;
  loss.sparsity = options.sparsity_weight != 0.0 ? sparsity_sum / p : 0.0;
  loss.total = loss.recon + options.alpha * loss.classif +
               options.sparsity_weight * loss.sparsity;
  return eval;
}

Gradients backward(const ModelParams& params, const Batch& batch,
                   const std::vector<ForwardCache>& caches, const LossOptions& options) {
  options.validate();
  if (caches.size() != batch.size()) {
    throw IntegrityError("backward: batch has " + std::to_string(batch.size()) +
                         " examples but " + std::to_string(caches.size()) + " caches");
  }

  const ModelShape& shape = params.shape;
  Gradients g = Gradients::zeros(shape);

  const double p = static_cast<double>(batch.size());
  const std::size_t labeled = batch.labeled_count();
  const double recon_weight = options.reconstruction ? 1.0 / p : 0.0;
  const double classif_weight =
      (options.classifier && labeled > 0) ? options.alpha / static_cast<double>(labeled)
                                          : 0.0;
  const double sparsity_weight = options.sparsity_weight / p;

  Vec dz(shape.hidden_dim);
  Vec delta_dec(shape.input_dim);
  Vec delta_clf(shape.num_classes);
  Vec delta_enc(shape.hidden_dim);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ForwardCache& cache = caches[i];
    if (cache.z.size() != shape.hidden_dim ||
        cache.x_corrupted.size() != shape.input_dim) {
      throw IntegrityError("backward: cache " + std::to_string(i) +
                           " does not match the model shape");
    }
    const std::span<const double> x = batch.inputs[i];
    dz.assign(shape.hidden_dim, 0.0);

    if (options.reconstruction && recon_weight != 0.0) {
      // d/dx_hat of ||x - x_hat||^2, through the decoder tanh.
      for (std::size_t k = 0; k < shape.input_dim; ++k) {
        const double a = cache.x_hat[k];
        delta_dec[k] = recon_weight * 2.0 * (a - x[k]) * (1.0 - a * a);
      }
      add_outer_scaled(g.w_dec, delta_dec, cache.z, 1.0);
      kernels::axpy(g.b_dec.data(), 1.0, delta_dec.data(), shape.input_dim);
      add_matvec_transposed(dz, params.w_dec, delta_dec, 1.0);
    }

    // Unlabeled examples skip this block, so they leave the classifier
    // arrays untouched and feed only reconstruction into the encoder delta.
    if (classif_weight != 0.0 && batch.labels[i] >= 0) {
      const auto label = static_cast<std::size_t>(batch.labels[i]);
      for (std::size_t j = 0; j < shape.num_classes; ++j) {
        delta_clf[j] = classif_weight * (cache.h[j] - (j == label ? 1.0 : 0.0));
      }
      add_outer_scaled(g.w_clf, delta_clf, cache.z, 1.0);
      kernels::axpy(g.b_clf.data(), 1.0, delta_clf.data(), shape.num_classes);
      add_matvec_transposed(dz, params.w_clf, delta_clf, 1.0);
    }

    if (sparsity_weight != 0.0) {
      for (std::size_t k = 0; k < shape.hidden_dim; ++k) {
        dz[k] += sparsity_weight * sign(cache.z[k]);
      }
    }

    // tanh'(pre-activation) from the cached activation: 1 - z^2.
    for (std::size_t k = 0; k < shape.hidden_dim; ++k) {
      const double zk = cache.z[k];
      delta_enc[k] = dz[k] * (1.0 - zk * zk);
    }
    add_outer_scaled(g.w_enc, delta_enc, cache.x_corrupted, 1.0);
    kernels::axpy(g.b_enc.data(), 1.0, delta_enc.data(), shape.hidden_dim);
  }
  return g;
}

Gradients central_difference(ModelParams params, double step,
                             const std::function<long double(const ModelParams&)>& func) {
  if (step <= 0.0) throw ConfigError("finite-difference step must be > 0");
  Gradients g = Gradients::zeros(params.shape);
  const std::vector<ParamView> views = param_views(params);
  std::vector<ParamView> grads = grad_views(g);
  for (std::size_t a = 0; a < views.size(); ++a) {
    for (std::size_t i = 0; i < views[a].size; ++i) {
      double& theta = views[a].values[i];
      const double original = theta;
      const double plus = original + step;
      const double minus = original - step;
      theta = plus;
      const long double f_plus = func(params);
      theta = minus;
      const long double f_minus = func(params);
      theta = original;
      const double denom = plus - minus;
      if (denom == 0.0) {
        throw NumericError("finite-difference step vanished for parameter " +
                           std::string(views[a].name));
      }
      grads[a].values[i] =
          static_cast<double>((f_plus - f_minus) / static_cast<long double>(denom));
    }
  }
  return g;
}

Gradients finite_difference_gradient(const ModelParams& params, const Batch& batch,
                                     const LossOptions& options, double step,
                                     std::uint64_t corruption_seed) {
  // The loss terms are recombined here in long double. The untouched terms
  // of a perturbed evaluation are bitwise identical between f(t+d) and
  // f(t-d) and cancel exactly; combining at double precision would instead
  // leave alpha-sized rounding residue behind the subtraction.
  return central_difference(params, step, [&](const ModelParams& point) -> long double {
    Rng replay(corruption_seed);
    const LossBreakdown loss = batch_loss(point, batch, options, replay).loss;
    long double total = 0.0L;
    if (options.reconstruction) total += static_cast<long double>(loss.recon);
    if (options.classifier) {
      total += static_cast<long double>(options.alpha) *
               static_cast<long double>(loss.classif);
    }
    total += static_cast<long double>(options.sparsity_weight) *
             static_cast<long double>(loss.sparsity);
    return total;
  });
}

double max_relative_gradient_error(Gradients& a, Gradients& b, std::string* worst) {
  const std::vector<ParamView> va = grad_views(a);
  const std::vector<ParamView> vb = grad_views(b);
  double max_err = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) {
    for (std::size_t i = 0; i < va[k].size; ++i) {
      const double ga = va[k].values[i];
      const double gb = vb[k].values[i];
      const double denom = std::max({std::abs(ga), std::abs(gb), 1e-8});
      const double err = std::abs(ga - gb) / denom;
      if (err > max_err) {
        max_err = err;
        if (worst) {
          *worst = std::string(va[k].name) + "[" + std::to_string(i) + "]";
        }
      }
    }
  }
  return max_err;
}

}  // namespace sssae
