#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sssae/data_pipeline.hpp"
#include "sssae/model.hpp"
#include "sssae/objective.hpp"

namespace sssae {

// Which loss paths a training run drives. The supervised baseline is the
// same machinery with reconstruction and corruption turned off; a pure
// denoising autoencoder drops the classifier path instead.
enum class TrainingMode {
  kSemiSupervised,
  kSupervisedOnly,
  kAutoencoderOnly,
};

struct TrainConfig {
  double alpha = 1.0;
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  double lr_initial = 0.05;
  std::size_t lr_decay_start = 25;
  double lr_floor = 1e-4;
  double corruption_rate = 0.2;
  double sparsity_weight = 0.0;
  std::uint64_t seed = 0;
  std::size_t patience = 0;  // epochs without validation improvement; 0 = disabled

  void validate() const;
};

// Named sub-streams derived from the master seed, so initialization,
// shuffling and corruption stay independent and individually replayable.
inline constexpr std::uint64_t kInitStream = 0x11;
inline constexpr std::uint64_t kShuffleStream = 0x22;
inline constexpr std::uint64_t kCorruptStream = 0x33;

struct EpochRecord {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double mean_recon = 0.0;    // per-example mean over the epoch
  double mean_classif = 0.0;  // per-labeled-example mean over the epoch
  double mean_total = 0.0;
  double valid_accuracy = 0.0;
  double seconds = 0.0;  // wall clock; excluded from determinism checks
};

struct TrainLog {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ModelParams best;    // snapshot with the highest validation accuracy
  ModelParams final_params;
  TrainLog log;
  std::size_t best_epoch = 0;
  double best_accuracy = 0.0;
};

// Learning-rate schedule: constant until lr_decay_start, then a linear ramp
// that would reach lr_floor one step past the last epoch.
double learning_rate(const TrainConfig& config, std::size_t epoch);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch SGD over the shuffled union of labeled and unlabeled examples.
// Short final batches are kept and averaged over their actual size. Ties in
// validation accuracy keep the earliest snapshot.
TrainResult train(ModelParams model, const StackedDataset& train_set,
                  const StackedDataset& valid_set, const TrainConfig& config,
                  TrainingMode mode = TrainingMode::kSemiSupervised,
                  const EpochCallback& on_epoch = nullptr);

// The supervised reference system: a tanh hidden layer plus softmax trained
// by cross-entropy on the labeled examples of `train_set` only. Unlabeled
// examples and the decoder play no part.
TrainResult train_supervised_baseline(const ModelShape& shape,
                                      const StackedDataset& train_set,
                                      const StackedDataset& valid_set,
                                      const TrainConfig& config,
                                      const EpochCallback& on_epoch = nullptr);

// Incremental CSV writer for training logs: provenance comments, a header
// row, then one flushed row per epoch so interrupted runs keep their tail.
class TrainLogWriter {
 public:
  TrainLogWriter(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& provenance);
  void append(const EpochRecord& record);

 private:
  std::ofstream out_;
};

}  // namespace sssae
