#include "sssae/evaluation.hpp"

#include <cstdio>
#include <fstream>

#include "sssae/error.hpp"

namespace sssae {

std::vector<std::int32_t> predict(const ModelParams& params, const StackedDataset& ds) {
  if (ds.input_dim() != params.shape.input_dim) {
    throw ShapeError("predict: dataset dimension " + std::to_string(ds.input_dim()) +
                     " does not match model input " +
                     std::to_string(params.shape.input_dim));
  }
  std::vector<std::int32_t> preds(ds.size());
  Vec z;
  Vec logits;
  Vec x;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto input = ds.input(i);
    x.assign(input.begin(), input.end());
    affine_into(z, params.w_enc, x, &params.b_enc);
    tanh_inplace(z);
    affine_into(logits, params.w_clf, z, &params.b_clf);
    // argmax of the logits is the argmax of the softmax posterior
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
      if (logits[j] > logits[best]) best = j;
    }
    preds[i] = static_cast<std::int32_t>(best);
  }
  return preds;
}

std::vector<std::int32_t> reference_labels(const StackedDataset& ds) {
  std::vector<std::int32_t> refs(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::int32_t label = ds.reference_label(i);
    if (label < 0) {
      throw IntegrityError("example " + std::to_string(i) +
                           " has no ground-truth label to score against");
    }
    refs[i] = label;
  }
  return refs;
}

EvalReport evaluate(const std::vector<std::int32_t>& preds,
                    const std::vector<std::int32_t>& refs, const CollapseMap& map) {
  if (preds.size() != refs.size()) {
    throw ShapeError("evaluate: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(refs.size()) + " references");
  }
  const auto num_sources = static_cast<std::int32_t>(map.num_sources());
  EvalReport report;
  report.num_frames = preds.size();
  report.num_targets = map.num_targets();
  report.confusion.assign(report.num_targets * report.num_targets, 0);

  std::size_t raw_correct = 0;
  std::size_t collapsed_correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::int32_t pred = preds[i];
    const std::int32_t ref = refs[i];
    if (pred < 0 || pred >= num_sources || ref < 0 || ref >= num_sources) {
      throw IntegrityError("evaluate: index out of range at frame " + std::to_string(i) +
                           " (pred=" + std::to_string(pred) + " ref=" +
                           std::to_string(ref) + ", " + std::to_string(num_sources) +
                           " phones)");
    }
    if (pred == ref) ++raw_correct;
    const auto pred_t = static_cast<std::size_t>(map.to_target[pred]);
    const auto ref_t = static_cast<std::size_t>(map.to_target[ref]);
    if (pred_t == ref_t) ++collapsed_correct;
    ++report.confusion[ref_t * report.num_targets + pred_t];
  }
  if (!preds.empty()) {
    report.accuracy_raw = static_cast<double>(raw_correct) / preds.size();
    report.accuracy_collapsed = static_cast<double>(collapsed_correct) / preds.size();
  }
  return report;
}

void write_eval_report(const EvalReport& report, const CollapseMap& map,
                       const std::vector<std::pair<std::string, std::string>>& provenance,
                       const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open eval report for writing: " + path);
  for (const auto& [key, value] : provenance) {
    out << "# " << key << " = " << value << "\n";
  }
  char buffer[40];
  out << "metric,value\n";
  out << "frames," << report.num_frames << "\n";
  std::snprintf(buffer, sizeof(buffer), "%.6f", report.accuracy_collapsed);
  out << "accuracy_collapsed," << buffer << "\n";
  std::snprintf(buffer, sizeof(buffer), "%.6f", report.accuracy_raw);
  out << "accuracy_raw," << buffer << "\n";
  out << "\n";

  out << "ref\\pred";
  for (std::size_t j = 0; j < report.num_targets; ++j) {
    out << ',' << map.targets.name(j);
  }
  out << "\n";
  for (std::size_t i = 0; i < report.num_targets; ++i) {
    out << map.targets.name(i);
    for (std::size_t j = 0; j < report.num_targets; ++j) {
      out << ',' << report.confusion_at(i, j);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing eval report: " + path);
}

}  // namespace sssae
