#include "sssae/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sssae/error.hpp"
#include "sssae/evaluation.hpp"
#include "sssae/kernels.hpp"

namespace sssae {

namespace {

LossOptions options_for(const TrainConfig& config, TrainingMode mode) {
  LossOptions options;
  switch (mode) {
    case TrainingMode::kSemiSupervised:
      options.alpha = config.alpha;
      options.corruption_rate = config.corruption_rate;
      options.sparsity_weight = config.sparsity_weight;
      options.reconstruction = true;
      options.classifier = true;
      break;
    case TrainingMode::kSupervisedOnly:
      options.alpha = 1.0;
      options.corruption_rate = 0.0;
      options.sparsity_weight = 0.0;
      options.reconstruction = false;
      options.classifier = true;
      break;
    case TrainingMode::kAutoencoderOnly:
      options.alpha = 0.0;
      options.corruption_rate = config.corruption_rate;
      options.sparsity_weight = config.sparsity_weight;
      options.reconstruction = true;
      options.classifier = false;
      break;
  }
  return options;
}

void apply_sgd_step(ModelParams& params, Gradients& grads, double lr) {
  const std::vector<ParamView> p = param_views(params);
  const std::vector<ParamView> g = grad_views(grads);
  for (std::size_t k = 0; k < p.size(); ++k) {
    kernels::axpy(p[k].values, -lr, g[k].values, p[k].size);
  }
}

double frame_accuracy(const ModelParams& params, const StackedDataset& ds) {
  const std::vector<std::int32_t> preds = predict(params, ds);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (preds[i] == ds.reference_label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (lr_initial <= 0.0) throw ConfigError("initial learning rate must be > 0");
  if (lr_floor < 0.0 || lr_floor > lr_initial) {
    throw ConfigError("learning-rate floor must lie in [0, lr_initial]");
  }
  if (lr_decay_start > epochs) {
    throw ConfigError("lr_decay_start must be <= epochs");
  }
  if (corruption_rate < 0.0 || corruption_rate > 1.0) {
    throw ConfigError("corruption rate must lie in [0, 1]");
  }
  if (sparsity_weight < 0.0) throw ConfigError("sparsity weight must be >= 0");
}

double learning_rate(const TrainConfig& config, std::size_t epoch) {
  if (epoch < config.lr_decay_start) return config.lr_initial;
  const double progress = static_cast<double>(epoch - config.lr_decay_start) /
                          static_cast<double>(config.epochs - config.lr_decay_start);
  return config.lr_initial + (config.lr_floor - config.lr_initial) * progress;
}

TrainResult train(ModelParams model, const StackedDataset& train_set,
                  const StackedDataset& valid_set, const TrainConfig& config,
                  TrainingMode mode, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (valid_set.empty()) throw ConfigError("validation set is empty");
  if (train_set.input_dim() != model.shape.input_dim ||
      valid_set.input_dim() != model.shape.input_dim) {
    throw ShapeError("dataset dimension (train " + std::to_string(train_set.input_dim()) +
                     ", valid " + std::to_string(valid_set.input_dim()) +
                     ") does not match model input " +
                     std::to_string(model.shape.input_dim));
  }
  if (mode != TrainingMode::kAutoencoderOnly &&
      train_set.num_classes() != model.shape.num_classes) {
    throw ConfigError("dataset has " + std::to_string(train_set.num_classes()) +
                      " classes but the model expects " +
                      std::to_string(model.shape.num_classes));
  }

  const LossOptions options = options_for(config, mode);

  Rng shuffle_rng(Rng::derive(config.seed, kShuffleStream));
  Rng corrupt_rng(Rng::derive(config.seed, kCorruptStream));

  TrainResult result;
  result.best = model;
  result.best_epoch = 0;
  result.best_accuracy = -1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  Batch batch;
  std::size_t epochs_since_improvement = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = learning_rate(config, epoch);
    shuffle_rng.shuffle(order);

    double recon_sum = 0.0;
    double classif_sum = 0.0;
    double sparsity_sum = 0.0;
    std::size_t labeled_total = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(begin + config.batch_size, order.size());
      batch.inputs.clear();
      batch.labels.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch.inputs.push_back(train_set.input(order[i]));
        batch.labels.push_back(train_set.training_label(order[i]));
      }

      BatchEval eval = batch_loss(model, batch, options, corrupt_rng);
      if (!std::isfinite(eval.loss.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(begin / config.batch_size));
      }
      Gradients grads = backward(model, batch, eval.caches, options);
      apply_sgd_step(model, grads, lr);

      recon_sum += eval.loss.recon * static_cast<double>(batch.size());
      classif_sum += eval.loss.classif * static_cast<double>(eval.loss.labeled_count);
      sparsity_sum += eval.loss.sparsity * static_cast<double>(batch.size());
      labeled_total += eval.loss.labeled_count;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = lr;
    record.mean_recon = recon_sum / static_cast<double>(train_set.size());
    record.mean_classif =
        labeled_total > 0 ? classif_sum / static_cast<double>(labeled_total) : 0.0;
    const double mean_sparsity = sparsity_sum / static_cast<double>(train_set.size());
    record.mean_total = (options.reconstruction ? record.mean_recon : 0.0) +
                        (options.classifier ? options.alpha * record.mean_classif : 0.0) +
                        options.sparsity_weight * mean_sparsity;
    record.valid_accuracy = frame_accuracy(model, valid_set);
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    result.log.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.valid_accuracy > result.best_accuracy) {
      result.best_accuracy = record.valid_accuracy;
      result.best_epoch = epoch;
      result.best = model;
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
      if (config.patience > 0 && epochs_since_improvement >= config.patience) break;
    }
  }

  result.final_params = std::move(model);
  if (result.best_accuracy < 0.0) {
    // no epoch ran; the initialization is both best and final
    result.best_accuracy = 0.0;
  }
  return result;
}

TrainResult train_supervised_baseline(const ModelShape& shape,
                                      const StackedDataset& train_set,
                                      const StackedDataset& valid_set,
                                      const TrainConfig& config,
                                      const EpochCallback& on_epoch) {
  const StackedDataset labeled = train_set.labeled_subset();
  if (labeled.empty()) {
    throw ConfigError("supervised baseline needs at least one labeled example");
  }
  Rng init_rng(Rng::derive(config.seed, kInitStream));
  ModelParams params = ModelParams::init(shape, init_rng);
  return train(std::move(params), labeled, valid_set, config,
               TrainingMode::kSupervisedOnly, on_epoch);
}

TrainLogWriter::TrainLogWriter(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& provenance)
    : out_(path, std::ios::trunc) {
  if (!out_) throw IoError("cannot open training log for writing: " + path);
  for (const auto& [key, value] : provenance) {
    out_ << "# " << key << " = " << value << "\n";
  }
  out_ << "epoch,learning_rate,mean_recon,mean_classif,mean_total,valid_accuracy,"
          "seconds\n";
  out_.flush();
}

void TrainLogWriter::append(const EpochRecord& record) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "%zu,%.6g,%.8g,%.8g,%.8g,%.6f,%.3f",
                record.epoch, record.learning_rate, record.mean_recon,
                record.mean_classif, record.mean_total, record.valid_accuracy,
                record.seconds);
  out_ << buffer << "\n";
  out_.flush();
  if (!out_) throw IoError("failed writing training log row");
}

}  // namespace sssae
