#include "sssae/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "sssae/binio.hpp"
#include "sssae/error.hpp"
#include "sssae/rng.hpp"

namespace sssae {

namespace {

constexpr char kCacheMagic[4] = {'S', 'S', 'D', 'S'};
constexpr std::uint8_t kCacheVersion = 1;

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t hash, const char* bytes, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= static_cast<unsigned char>(bytes[i]);
    hash *= kFnvPrime;
  }
  return hash;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

std::size_t parse_index(const std::string& text, std::size_t line_no) {
  std::size_t value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": bad frame index '" + text +
                     "'");
  }
  return value;
}

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

}  // namespace

PhoneSet::PhoneSet(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    index_[names_[i]] = static_cast<std::int32_t>(i);
  }
}

PhoneSet PhoneSet::numeric(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back(std::to_string(i));
  return PhoneSet(std::move(names));
}

std::int32_t PhoneSet::index_of(const std::string& name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

FrameTable::FrameTable(std::vector<FrameRow> rows, std::size_t feature_dim,
                       PhoneSet phones, std::uint64_t source_digest)
    : rows_(std::move(rows)),
      feature_dim_(feature_dim),
      phones_(std::move(phones)),
      source_digest_(source_digest) {
  validate();
}

void FrameTable::validate() const {
  std::unordered_set<std::string> finished;
  const std::string* current = nullptr;
  std::size_t expected_index = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const FrameRow& row = rows_[i];
    if (row.features.size() != feature_dim_) {
      throw IntegrityError("row " + std::to_string(i) + " has " +
                           std::to_string(row.features.size()) + " features, expected " +
                           std::to_string(feature_dim_));
    }
    if (current == nullptr || row.utterance != *current) {
      if (current != nullptr) finished.insert(*current);
      if (finished.contains(row.utterance)) {
        throw IntegrityError("utterance '" + row.utterance +
                             "' appears in non-contiguous blocks");
      }
      current = &row.utterance;
      expected_index = 0;
    }
    if (row.frame_index != expected_index) {
      throw IntegrityError("utterance '" + row.utterance + "': frame index " +
                           std::to_string(row.frame_index) + " where " +
                           std::to_string(expected_index) + " was expected");
    }
    ++expected_index;
  }
}

CollapseMap CollapseMap::identity(std::size_t count) {
  CollapseMap map;
  map.sources = PhoneSet::numeric(count);
  map.targets = PhoneSet::numeric(count);
  map.to_target.resize(count);
  std::iota(map.to_target.begin(), map.to_target.end(), 0);
  return map;
}

StackedDataset::StackedDataset(std::size_t input_dim, std::size_t num_classes)
    : input_dim_(input_dim), num_classes_(num_classes) {}

void StackedDataset::push_example(std::span<const double> input, std::int32_t truth,
                                  bool labeled) {
  if (input.size() != input_dim_) {
    throw ShapeError("example has dimension " + std::to_string(input.size()) +
                     ", dataset expects " + std::to_string(input_dim_));
  }
  features_.insert(features_.end(), input.begin(), input.end());
  truth_.push_back(truth);
  labeled_.push_back(labeled ? 1 : 0);
}

std::size_t StackedDataset::labeled_count() const {
  std::size_t n = 0;
  for (const std::uint8_t flag : labeled_) n += flag;
  return n;
}

StackedDataset StackedDataset::labeled_subset() const {
  StackedDataset out(input_dim_, num_classes_);
  out.provenance_ = provenance_;
  for (std::size_t i = 0; i < size(); ++i) {
    if (is_labeled(i)) out.push_example(input(i), truth_[i], true);
  }
  return out;
}

FrameTable load_frame_table(const std::string& path, const PhoneSet& phones) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open frame table: " + path);

  std::string line;
  std::size_t line_no = 0;
  std::uint64_t digest = kFnvOffset;

  if (!std::getline(in, line)) {
    throw ParseError(path + ": missing header row");
  }
  ++line_no;
  digest = fnv1a(digest, line.data(), line.size());
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "utt" || header[1] != "spk" ||
      header[2] != "idx" || header[3] != "label") {
    throw ParseError(path + ": header must start with utt,spk,idx,label,f0,...");
  }
  const std::size_t feature_dim = header.size() - 4;

  std::vector<FrameRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    digest = fnv1a(digest, line.data(), line.size());
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != feature_dim + 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(feature_dim + 4) + " fields, got " +
                       std::to_string(fields.size()));
    }
    FrameRow row;
    row.utterance = fields[0];
    row.speaker = fields[1];
    row.frame_index = parse_index(fields[2], line_no);
    if (fields[3].empty()) {
      row.label = -1;
    } else {
      row.label = phones.index_of(fields[3]);
      if (row.label < 0) {
        throw ParseError("line " + std::to_string(line_no) + ": unknown label '" +
                         fields[3] + "'");
      }
    }
    row.features.reserve(feature_dim);
    for (std::size_t f = 0; f < feature_dim; ++f) {
      row.features.push_back(parse_double(fields[4 + f], line_no));
    }
    rows.push_back(std::move(row));
  }
  return FrameTable(std::move(rows), feature_dim, phones, digest);
}

void save_frame_table(const FrameTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open frame table for writing: " + path);
  out << "utt,spk,idx,label";
  for (std::size_t f = 0; f < table.feature_dim(); ++f) out << ",f" << f;
  out << "\n";
  char buffer[40];
  for (const FrameRow& row : table.rows()) {
    out << row.utterance << ',' << row.speaker << ',' << row.frame_index << ',';
    if (row.label >= 0) out << table.phones().name(static_cast<std::size_t>(row.label));
    for (const double v : row.features) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", v);
      out << ',' << buffer;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing frame table: " + path);
}

FrameTable normalize_per_speaker(FrameTable table) {
  if (table.empty()) throw ConfigError("cannot normalize an empty frame table");
  const std::size_t dim = table.feature_dim();

  std::unordered_map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < table.size(); ++i) {
    by_speaker[table.row(i).speaker].push_back(i);
  }

  Vec mean(dim);
  Vec variance(dim);
  for (auto& [speaker, indices] : by_speaker) {
    const double count = static_cast<double>(indices.size());
    std::fill(mean.begin(), mean.end(), 0.0);
    for (const std::size_t i : indices) {
      const Vec& f = table.row(i).features;
      for (std::size_t d = 0; d < dim; ++d) mean[d] += f[d];
    }
    for (std::size_t d = 0; d < dim; ++d) mean[d] /= count;

    std::fill(variance.begin(), variance.end(), 0.0);
    for (const std::size_t i : indices) {
      const Vec& f = table.row(i).features;
      for (std::size_t d = 0; d < dim; ++d) {
        const double centered = f[d] - mean[d];
        variance[d] += centered * centered;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) variance[d] /= count;

    for (const std::size_t i : indices) {
      Vec& f = table.row(i).features;
      for (std::size_t d = 0; d < dim; ++d) {
        f[d] -= mean[d];
        if (variance[d] > 0.0) f[d] /= std::sqrt(variance[d]);
      }
    }
  }
  return table;
}

FrameTable compress_range(FrameTable table, double clip) {
  if (clip <= 0.0) throw ConfigError("clip must be > 0");
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (double& v : table.row(i).features) {
      v = std::clamp(v, -clip, clip) / clip;
    }
  }
  return table;
}

StackedDataset stack_context(const FrameTable& table, std::size_t left,
                             std::size_t right) {
  table.validate();
  const std::size_t dim = table.feature_dim();
  const std::size_t window = left + 1 + right;
  StackedDataset ds(window * dim, table.phones().size());
  ds.provenance().source_digest = table.source_digest();

  Vec stacked(window * dim);
  std::size_t start = 0;
  while (start < table.size()) {
    std::size_t end = start + 1;
    while (end < table.size() &&
           table.row(end).utterance == table.row(start).utterance) {
      ++end;
    }
    for (std::size_t center = start; center < end; ++center) {
      double* out = stacked.data();
      for (std::size_t pos = 0; pos < window; ++pos) {
        // Clamp the neighbor offset inside the utterance: edge frames are
        // replicated rather than padded with zeros.
        const std::ptrdiff_t offset =
            static_cast<std::ptrdiff_t>(pos) - static_cast<std::ptrdiff_t>(left);
        std::ptrdiff_t source = static_cast<std::ptrdiff_t>(center) + offset;
        source = std::clamp(source, static_cast<std::ptrdiff_t>(start),
                            static_cast<std::ptrdiff_t>(end) - 1);
        const Vec& f = table.row(static_cast<std::size_t>(source)).features;
        std::copy(f.begin(), f.end(), out);
        out += dim;
      }
      const std::int32_t label = table.row(center).label;
      ds.push_example(stacked, label, label >= 0);
    }
    start = end;
  }
  return ds;
}

StackedDataset split_labels(StackedDataset ds, double fraction, std::uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ConfigError("labeled fraction must lie in (0, 1]");
  }
  if (ds.labeled_count() != ds.size()) {
    throw ConfigError("split_labels requires a fully labeled dataset");
  }
  const auto target =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  if (target == 0) {
    throw ConfigError("labeled fraction " + std::to_string(fraction) +
                      " leaves zero labeled examples");
  }
  if (target >= ds.size()) {
    ds.provenance().split_seed = seed;
    ds.provenance().labeled_fraction = fraction;
    return ds;
  }

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::uint8_t> keep(ds.size(), 0);
  for (std::size_t i = 0; i < target; ++i) keep[order[i]] = 1;
  for (std::size_t i = 0; i < ds.size(); ++i) ds.labeled_[i] = keep[i];

  ds.provenance().split_seed = seed;
  ds.provenance().labeled_fraction = fraction;
  return ds;
}

CollapseMap load_collapse_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open collapse map: " + path);

  std::vector<std::string> source_names;
  std::vector<std::string> target_names;
  std::unordered_map<std::string, std::int32_t> target_index;
  std::unordered_set<std::string> seen_sources;
  std::vector<std::int32_t> to_target;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;

    std::istringstream fields(content);
    std::string source, target, extra;
    if (!(fields >> source >> target) || (fields >> extra)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected '<source> <target>'");
    }
    if (!seen_sources.insert(source).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate source phone '" +
                       source + "'");
    }
    auto [it, inserted] =
        target_index.try_emplace(target, static_cast<std::int32_t>(target_names.size()));
    if (inserted) target_names.push_back(target);
    source_names.push_back(source);
    to_target.push_back(it->second);
  }

  if (source_names.size() != 48) {
    throw IntegrityError("collapse map defines " + std::to_string(source_names.size()) +
                         " source phones, expected all 48");
  }
  if (target_names.size() != 39) {
    throw IntegrityError("collapse map image has " + std::to_string(target_names.size()) +
                         " classes, expected exactly 39");
  }

  CollapseMap map;
  map.sources = PhoneSet(std::move(source_names));
  map.targets = PhoneSet(std::move(target_names));
  map.to_target = std::move(to_target);
  return map;
}

StackedDataset generate_synthetic(std::size_t num_classes, std::size_t dim,
                                  std::size_t per_class, double noise,
                                  std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("synthetic generator needs >= 2 classes");
  if (dim < 2) throw ConfigError("synthetic generator needs dimension >= 2");
  if (noise < 0.0) throw ConfigError("noise must be >= 0");

  Rng rng(seed);
  constexpr double kMeanScale = 0.7;  // leaves headroom before the [-1,1] clamp

  std::vector<Vec> means(num_classes, Vec(dim));
  for (Vec& mean : means) {
    double norm = 0.0;
    for (double& v : mean) {
      v = rng.gaussian();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      mean[0] = 1.0;
      norm = 1.0;
    }
    for (double& v : mean) v = v / norm * kMeanScale;
  }

  StackedDataset ds(dim, num_classes);
  Vec x(dim);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        x[d] = std::clamp(means[c][d] + noise * rng.gaussian(), -1.0, 1.0);
      }
      ds.push_example(x, static_cast<std::int32_t>(c), true);
    }
  }
  return ds;
}

void SynthConfig::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic frames need >= 2 classes");
  if (feature_dim < 2) throw ConfigError("synthetic frames need dimension >= 2");
  if (num_frames == 0) throw ConfigError("synthetic frames need >= 1 frame");
  if (frames_per_utterance == 0) throw ConfigError("frames_per_utterance must be >= 1");
  if (num_speakers == 0) throw ConfigError("num_speakers must be >= 1");
  if (min_segment_frames == 0 || min_segment_frames > max_segment_frames) {
    throw ConfigError("segment length range is invalid");
  }
  if (noise < 0.0 || speaker_shift < 0.0) {
    throw ConfigError("noise and speaker_shift must be >= 0");
  }
}

FrameTable generate_synthetic_frames(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);

  std::vector<Vec> means(config.num_classes, Vec(config.feature_dim));
  for (Vec& mean : means) {
    double norm = 0.0;
    for (double& v : mean) {
      v = rng.gaussian();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      mean[0] = 1.0;
      norm = 1.0;
    }
    for (double& v : mean) v = v / norm * config.class_separation;
  }

  std::vector<Vec> speaker_offsets(config.num_speakers, Vec(config.feature_dim));
  for (Vec& offset : speaker_offsets) {
    for (double& v : offset) v = config.speaker_shift * rng.gaussian();
  }

  std::vector<FrameRow> rows;
  rows.reserve(config.num_frames);
  std::size_t produced = 0;
  std::size_t utterance = 0;
  while (produced < config.num_frames) {
    const std::size_t speaker = static_cast<std::size_t>(rng.below(config.num_speakers));
    const std::size_t utt_len =
        std::min(config.frames_per_utterance, config.num_frames - produced);
    char utt_name[24];
    std::snprintf(utt_name, sizeof(utt_name), "u%06zu", utterance);
    char spk_name[24];
    std::snprintf(spk_name, sizeof(spk_name), "s%03zu", speaker);

    std::size_t frame = 0;
    while (frame < utt_len) {
      const std::size_t span = config.max_segment_frames - config.min_segment_frames + 1;
      std::size_t segment =
          config.min_segment_frames + static_cast<std::size_t>(rng.below(span));
      segment = std::min(segment, utt_len - frame);
      const auto label = static_cast<std::int32_t>(rng.below(config.num_classes));
      for (std::size_t k = 0; k < segment; ++k) {
        FrameRow row;
        row.utterance = utt_name;
        row.speaker = spk_name;
        row.frame_index = frame;
        row.label = label;
        row.features.resize(config.feature_dim);
        for (std::size_t d = 0; d < config.feature_dim; ++d) {
          row.features[d] = means[static_cast<std::size_t>(label)][d] +
                            speaker_offsets[speaker][d] + config.noise * rng.gaussian();
        }
        rows.push_back(std::move(row));
        ++frame;
      }
    }
    produced += utt_len;
    ++utterance;
  }

  return FrameTable(std::move(rows), config.feature_dim,
                    PhoneSet::numeric(config.num_classes), Rng::derive(config.seed, 0x5f));
}

void save_dataset(const StackedDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open dataset cache for writing: " + path);
  io::write_magic(out, kCacheMagic, kCacheVersion);
  io::write_u64(out, ds.size());
  io::write_u64(out, ds.input_dim_);
  io::write_u64(out, ds.num_classes_);
  io::write_u64(out, ds.provenance_.source_digest);
  io::write_u64(out, ds.provenance_.split_seed);
  io::write_f64(out, ds.provenance_.labeled_fraction);
  for (const std::int32_t label : ds.truth_) {
    io::write_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(label)));
  }
  out.write(reinterpret_cast<const char*>(ds.labeled_.data()),
            static_cast<std::streamsize>(ds.labeled_.size()));
  io::write_f64_array(out, ds.features_.data(), ds.features_.size());
  if (!out) throw IoError("failed writing dataset cache: " + path);
}

StackedDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset cache: " + path);
  const std::uint8_t version = io::read_magic(in, kCacheMagic, "dataset cache");
  if (version != kCacheVersion) {
    throw ParseError("dataset cache " + path + ": unsupported version " +
                     std::to_string(version));
  }
  const std::uint64_t count = io::read_u64(in);
  const std::uint64_t input_dim = io::read_u64(in);
  const std::uint64_t num_classes = io::read_u64(in);

  StackedDataset ds(input_dim, num_classes);
  ds.provenance_.source_digest = io::read_u64(in);
  ds.provenance_.split_seed = io::read_u64(in);
  ds.provenance_.labeled_fraction = io::read_f64(in);

  ds.truth_.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ds.truth_[i] = static_cast<std::int32_t>(static_cast<std::int64_t>(io::read_u64(in)));
  }
  ds.labeled_.resize(count);
  in.read(reinterpret_cast<char*>(ds.labeled_.data()),
          static_cast<std::streamsize>(count));
  ds.features_.resize(count * input_dim);
  io::read_f64_array(in, ds.features_.data(), ds.features_.size());
  if (!in) throw IoError("dataset cache " + path + " is truncated");
  return ds;
}

std::uint64_t digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for digest: " + path);
  std::uint64_t digest = kFnvOffset;
  char buffer[65536];
  while (in) {
    in.read(buffer, sizeof(buffer));
    digest = fnv1a(digest, buffer, static_cast<std::size_t>(in.gcount()));
  }
  return digest;
}

}  // namespace sssae
