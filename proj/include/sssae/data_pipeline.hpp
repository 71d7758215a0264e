#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sssae/tensor.hpp"

namespace sssae {

// Ordered label inventory; index = position. Used both for real phone sets
// (from a collapse-map file) and numeric synthetic classes ("0", "1", ...).
class PhoneSet {
 public:
  PhoneSet() = default;
  explicit PhoneSet(std::vector<std::string> names);
  static PhoneSet numeric(std::size_t count);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_[index]; }
  const std::vector<std::string>& names() const { return names_; }
  // -1 when unknown.
  std::int32_t index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct FrameRow {
  std::string utterance;
  std::string speaker;
  std::size_t frame_index = 0;
  Vec features;
  std::int32_t label = -1;  // -1 = unlabeled
};

// Per-frame feature records grouped into contiguous utterances.
class FrameTable {
 public:
  FrameTable() = default;
  FrameTable(std::vector<FrameRow> rows, std::size_t feature_dim, PhoneSet phones,
             std::uint64_t source_digest = 0);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t feature_dim() const { return feature_dim_; }
  const FrameRow& row(std::size_t i) const { return rows_[i]; }
  FrameRow& row(std::size_t i) { return rows_[i]; }
  const std::vector<FrameRow>& rows() const { return rows_; }
  const PhoneSet& phones() const { return phones_; }
  std::uint64_t source_digest() const { return source_digest_; }

  // Checks utterance contiguity and 0,1,2,... frame indices per utterance.
  void validate() const;

 private:
  std::vector<FrameRow> rows_;
  std::size_t feature_dim_ = 0;
  PhoneSet phones_;
  std::uint64_t source_digest_ = 0;
};

// Mapping from a training phone inventory onto the smaller scoring
// inventory (48 -> 39 for the standard phone set; identity for synthetic
// labels).
struct CollapseMap {
  PhoneSet sources;
  PhoneSet targets;
  std::vector<std::int32_t> to_target;  // index per source

  static CollapseMap identity(std::size_t count);
  std::size_t num_sources() const { return sources.size(); }
  std::size_t num_targets() const { return targets.size(); }
};

struct DatasetProvenance {
  std::uint64_t source_digest = 0;
  std::uint64_t split_seed = 0;
  double labeled_fraction = 1.0;
};

// Context-stacked examples ready for training. The ground-truth label of
// every example is kept for evaluation, but training code only ever sees
// labels through training_label(), which hides them once an example has
// been marked unlabeled by split_labels().
class StackedDataset {
 public:
  StackedDataset() = default;
  StackedDataset(std::size_t input_dim, std::size_t num_classes);

  void push_example(std::span<const double> input, std::int32_t truth, bool labeled);

  std::size_t size() const { return labeled_.size(); }
  bool empty() const { return labeled_.empty(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }

  std::span<const double> input(std::size_t i) const {
    return {features_.data() + i * input_dim_, input_dim_};
  }
  bool is_labeled(std::size_t i) const { return labeled_[i] != 0; }
  // -1 for examples the trainer must treat as unlabeled.
  std::int32_t training_label(std::size_t i) const {
    return labeled_[i] ? truth_[i] : -1;
  }
  // Evaluation-only: the ground truth regardless of the labeled flag.
  std::int32_t reference_label(std::size_t i) const { return truth_[i]; }

  std::size_t labeled_count() const;
  StackedDataset labeled_subset() const;

  const DatasetProvenance& provenance() const { return provenance_; }
  DatasetProvenance& provenance() { return provenance_; }

 private:
  std::size_t input_dim_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> features_;
  std::vector<std::int32_t> truth_;
  std::vector<std::uint8_t> labeled_;
  DatasetProvenance provenance_;

  friend void save_dataset(const StackedDataset&, const std::string&);
  friend StackedDataset load_dataset(const std::string&);
  friend StackedDataset split_labels(StackedDataset, double, std::uint64_t);
};

// Frame table file: UTF-8 CSV with header utt,spk,idx,label,f0,...,fN.
// The label column holds a phone symbol from `phones` or is empty.
FrameTable load_frame_table(const std::string& path, const PhoneSet& phones);
void save_frame_table(const FrameTable& table, const std::string& path);

// Per speaker and per coordinate: subtract the mean, divide by the
// population standard deviation; zero-variance coordinates are only
// centered.
FrameTable normalize_per_speaker(FrameTable table);

// Clamps every feature to [-clip, +clip] and rescales to [-1, 1], the range
// a tanh decoder can actually reproduce.
FrameTable compress_range(FrameTable table, double clip = 4.0);

// One example per frame: `left` neighbors + frame + `right` neighbors
// concatenated. Windows never cross utterance boundaries; missing context
// at an edge is filled by replicating the boundary frame.
StackedDataset stack_context(const FrameTable& table, std::size_t left,
                             std::size_t right);

// Keeps exactly round(fraction * size) examples labeled, drawn uniformly
// without replacement with the given seed; the rest become unlabeled (their
// truth stays available to evaluation only).
StackedDataset split_labels(StackedDataset ds, double fraction, std::uint64_t seed);

// Collapse-map file: lines of "<source> <target>", '#' comments. The file
// must define exactly 48 distinct sources whose targets form exactly 39
// distinct classes.
CollapseMap load_collapse_map(const std::string& path);

// Class-conditional Gaussian blobs, fully labeled, features clamped to
// [-1, 1]. Desk-scale stand-in for real corpus data.
StackedDataset generate_synthetic(std::size_t num_classes, std::size_t dim,
                                  std::size_t per_class, double noise,
                                  std::uint64_t seed);

// Synthetic frame tables with utterance/speaker structure: utterances are
// sequences of variable-length single-class segments, plus a per-speaker
// offset that speaker normalization should remove.
struct SynthConfig {
  std::size_t num_classes = 10;
  std::size_t feature_dim = 39;
  std::size_t num_frames = 20000;
  std::size_t frames_per_utterance = 100;
  std::size_t num_speakers = 20;
  std::size_t min_segment_frames = 5;
  std::size_t max_segment_frames = 15;
  double class_separation = 1.0;
  double noise = 0.35;
  double speaker_shift = 0.25;
  std::uint64_t seed = 1;

  void validate() const;
};
FrameTable generate_synthetic_frames(const SynthConfig& config);

// Binary cache: magic "SSDS", version byte, counts and provenance, then
// truth labels (i64), labeled flags (u8) and features (f64), all
// little-endian. Round-trips bit-exactly.
void save_dataset(const StackedDataset& ds, const std::string& path);
StackedDataset load_dataset(const std::string& path);

// FNV-1a over a file's bytes; the digest recorded in dataset provenance.
std::uint64_t digest_file(const std::string& path);

}  // namespace sssae
