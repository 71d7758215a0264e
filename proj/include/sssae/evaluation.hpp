#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sssae/data_pipeline.hpp"
#include "sssae/model.hpp"

namespace sssae {

struct EvalReport {
  double accuracy_collapsed = 0.0;
  double accuracy_raw = 0.0;
  std::size_t num_frames = 0;
  std::size_t num_targets = 0;
  // row = collapsed reference, column = collapsed prediction
  std::vector<std::uint64_t> confusion;

  std::uint64_t confusion_at(std::size_t ref, std::size_t pred) const {
    return confusion[ref * num_targets + pred];
  }
};

// Argmax class per example, corruption disabled, ties broken toward the
// lowest index.
std::vector<std::int32_t> predict(const ModelParams& params, const StackedDataset& ds);

// Ground-truth labels for scoring; fails if any example lacks one.
std::vector<std::int32_t> reference_labels(const StackedDataset& ds);

// Scores predictions after collapsing both sides through the map; also
// reports raw (uncollapsed) accuracy.
EvalReport evaluate(const std::vector<std::int32_t>& preds,
                    const std::vector<std::int32_t>& refs, const CollapseMap& map);

// CSV serialization: provenance comments, a scalar-metrics block, then the
// confusion matrix with phone-name headers.
void write_eval_report(const EvalReport& report, const CollapseMap& map,
                       const std::vector<std::pair<std::string, std::string>>& provenance,
                       const std::string& path);

}  // namespace sssae
