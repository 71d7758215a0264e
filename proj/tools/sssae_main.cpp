// sssae: semi-supervised sparse autoencoder experiments on frame data.
//
// Subcommands: synth, prepare, train, eval, gradcheck, sweep. Every command
// takes --seed and is bit-reproducible; effective settings are echoed as
// "# key = value" lines into each output file.
//
// Exit codes: 0 success, 1 user/config error, 2 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sssae/data_pipeline.hpp"
#include "sssae/error.hpp"
#include "sssae/evaluation.hpp"
#include "sssae/kernels.hpp"
#include "sssae/model.hpp"
#include "sssae/objective.hpp"
#include "sssae/trainer.hpp"

namespace fs = std::filesystem;
using namespace sssae;

namespace {

using Provenance = std::vector<std::pair<std::string, std::string>>;

int g_status = 0;

constexpr std::uint64_t kSplitStream = 0x51;
constexpr std::uint64_t kBaselineStream = 0xBB;

std::string fmt(double value, const char* spec = "%.6g") {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), spec, value);
  return buffer;
}

void echo(const Provenance& provenance) {
  for (const auto& [key, value] : provenance) {
    std::cout << "# " << key << " = " << value << "\n";
  }
}

std::uint64_t seed_for_alpha(std::uint64_t base, double alpha) {
  return Rng::derive(base, std::bit_cast<std::uint64_t>(alpha));
}

std::uint64_t seed_for_fraction(std::uint64_t base, double fraction) {
  return Rng::derive(base, std::bit_cast<std::uint64_t>(fraction));
}

// ---------------------------------------------------------------------------
// shared training flags

struct TrainFlags {
  double alpha = 1.0;
  std::size_t hidden = 10000;
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr_initial = 0.05;
  std::size_t lr_decay_start = 25;
  double lr_floor = 1e-4;
  double corruption = 0.2;
  double sparsity = 0.0;
  std::size_t patience = 0;
  std::uint64_t seed = 0;

  TrainConfig config() const {
    TrainConfig c;
    c.alpha = alpha;
    c.batch_size = batch_size;
    c.epochs = epochs;
    c.lr_initial = lr_initial;
    c.lr_decay_start = lr_decay_start;
    c.lr_floor = lr_floor;
    c.corruption_rate = corruption;
    c.sparsity_weight = sparsity;
    c.patience = patience;
    c.seed = seed;
    return c;
  }

  void describe(Provenance& p) const {
    p.emplace_back("alpha", fmt(alpha));
    p.emplace_back("hidden", std::to_string(hidden));
    p.emplace_back("epochs", std::to_string(epochs));
    p.emplace_back("batch_size", std::to_string(batch_size));
    p.emplace_back("lr_initial", fmt(lr_initial));
    p.emplace_back("lr_decay_start", std::to_string(lr_decay_start));
    p.emplace_back("lr_floor", fmt(lr_floor));
    p.emplace_back("corruption", fmt(corruption));
    p.emplace_back("sparsity", fmt(sparsity));
    p.emplace_back("patience", std::to_string(patience));
    p.emplace_back("seed", std::to_string(seed));
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags, bool with_alpha = true) {
  if (with_alpha) {
    cmd->add_option("--alpha", flags.alpha, "loss mixing weight")
        ->check(CLI::NonNegativeNumber);
  }
  cmd->add_option("--hidden", flags.hidden, "hidden units");
  cmd->add_option("--epochs", flags.epochs, "training epochs");
  cmd->add_option("--batch", flags.batch_size, "mini-batch size");
  cmd->add_option("--lr", flags.lr_initial, "initial learning rate");
  cmd->add_option("--lr-decay-start", flags.lr_decay_start,
                  "epoch where the linear decay begins");
  cmd->add_option("--lr-floor", flags.lr_floor, "learning rate at the end of decay");
  cmd->add_option("--corruption", flags.corruption,
                  "probability of zeroing each input coordinate");
  cmd->add_option("--sparsity", flags.sparsity, "optional L1 penalty on the code");
  cmd->add_option("--patience", flags.patience,
                  "early-stop epochs without improvement (0 = off)");
  cmd->add_option("--seed", flags.seed, "master seed");
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  SynthConfig config;
  std::string out;
  std::string out_valid, out_test;
  std::size_t valid_frames = 0, test_frames = 0;
};

// Rows [begin, end) as their own table; the caller splits at utterance
// boundaries so per-utterance frame indices stay intact.
FrameTable slice_table(const FrameTable& table, std::size_t begin, std::size_t end) {
  std::vector<FrameRow> rows(table.rows().begin() + static_cast<std::ptrdiff_t>(begin),
                             table.rows().begin() + static_cast<std::ptrdiff_t>(end));
  return FrameTable(std::move(rows), table.feature_dim(), table.phones(),
                    Rng::derive(table.source_digest(), begin));
}

void run_synth(const SynthArgs& args) {
  if ((args.valid_frames > 0) != !args.out_valid.empty() ||
      (args.test_frames > 0) != !args.out_test.empty()) {
    throw ConfigError("--out-valid/--out-test go together with --valid-frames/--test-frames");
  }
  const std::size_t extra = args.valid_frames + args.test_frames;
  SynthConfig config = args.config;
  config.num_frames += extra;
  if (extra > 0) {
    // splits happen between utterances, so every portion must fill whole ones
    for (const std::size_t n : {args.config.num_frames, args.valid_frames,
                                args.test_frames}) {
      if (n % config.frames_per_utterance != 0) {
        throw ConfigError("frame counts must be multiples of --frames-per-utt (" +
                          std::to_string(config.frames_per_utterance) +
                          ") when splitting");
      }
    }
  }

  const FrameTable table = generate_synthetic_frames(config);
  save_frame_table(slice_table(table, 0, args.config.num_frames), args.out);
  if (args.valid_frames > 0) {
    save_frame_table(slice_table(table, args.config.num_frames,
                                 args.config.num_frames + args.valid_frames),
                     args.out_valid);
  }
  if (args.test_frames > 0) {
    save_frame_table(
        slice_table(table, args.config.num_frames + args.valid_frames, table.size()),
        args.out_test);
  }

  Provenance p{{"command", "synth"},
               {"classes", std::to_string(args.config.num_classes)},
               {"dim", std::to_string(args.config.feature_dim)},
               {"frames", std::to_string(args.config.num_frames)},
               {"valid_frames", std::to_string(args.valid_frames)},
               {"test_frames", std::to_string(args.test_frames)},
               {"noise", fmt(args.config.noise)},
               {"separation", fmt(args.config.class_separation)},
               {"speaker_shift", fmt(args.config.speaker_shift)},
               {"seed", std::to_string(args.config.seed)}};
  echo(p);
  std::cout << "wrote " << args.config.num_frames << " frames to " << args.out << "\n";
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareArgs {
  std::string train_path, valid_path, test_path;
  std::string phones_path;
  std::size_t num_classes = 0;
  std::size_t left = 5, right = 5;
  double clip = 4.0;
  bool skip_normalize = false;
  std::string out_dir;
};

void corpus_note(std::size_t train, std::size_t valid, std::size_t test) {
  // reference corpus statistics; the training count appears in the
  // literature in two variants, either is accepted
  const bool train_match = train == 1068816 || train == 1068818;
  if (train_match && valid == 56005 && test == 57919) {
    std::cout << "frame counts match the reference corpus statistics "
              << "(train " << train << (train == 1068818 ? ", alternate count" : "")
              << ", valid 56005, test 57919)\n";
  }
}

void run_prepare(const PrepareArgs& args) {
  if (args.phones_path.empty() == (args.num_classes == 0)) {
    throw ConfigError("prepare needs exactly one of --phones or --classes");
  }
  std::vector<std::pair<std::string, std::string>> tables;  // name -> path
  if (!args.train_path.empty()) tables.emplace_back("train", args.train_path);
  if (!args.valid_path.empty()) tables.emplace_back("valid", args.valid_path);
  if (!args.test_path.empty()) tables.emplace_back("test", args.test_path);
  if (tables.empty()) {
    throw ConfigError("prepare needs at least one of --train/--valid/--test");
  }
  // check every input before writing anything, so a bad path cannot leave a
  // partial cache behind
  for (const auto& [name, path] : tables) {
    if (!fs::exists(path)) throw IoError("input does not exist: " + path);
  }

  PhoneSet phones;
  if (!args.phones_path.empty()) {
    phones = load_collapse_map(args.phones_path).sources;
  } else {
    phones = PhoneSet::numeric(args.num_classes);
  }

  fs::create_directories(args.out_dir);
  Provenance p{{"command", "prepare"},
               {"left", std::to_string(args.left)},
               {"right", std::to_string(args.right)},
               {"clip", fmt(args.clip)},
               {"normalize", args.skip_normalize ? "off" : "per-speaker"},
               {"classes", std::to_string(phones.size())}};
  echo(p);

  std::map<std::string, std::size_t> counts;
  for (const auto& [name, path] : tables) {
    FrameTable table = load_frame_table(path, phones);
    if (!table.empty()) {
      if (!args.skip_normalize) table = normalize_per_speaker(std::move(table));
      table = compress_range(std::move(table), args.clip);
    }
    const StackedDataset ds = stack_context(table, args.left, args.right);
    const std::string out = (fs::path(args.out_dir) / (name + ".sds")).string();
    save_dataset(ds, out);
    counts[name] = ds.size();
    std::cout << name << ": " << ds.size() << " frames (dim " << ds.input_dim()
              << ") -> " << out << "\n";
  }
  if (counts.size() == 3) {
    corpus_note(counts["train"], counts["valid"], counts["test"]);
  }
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string train_path, valid_path, out_dir;
  double label_fraction = 1.0;
  std::string mode = "sssae";
  TrainFlags flags;
};

void run_train(const TrainArgs& args) {
  StackedDataset train_set = load_dataset(args.train_path);
  const StackedDataset valid_set = load_dataset(args.valid_path);
  if (args.label_fraction < 1.0) {
    train_set = split_labels(std::move(train_set), args.label_fraction,
                             Rng::derive(args.flags.seed, kSplitStream));
  }

  const ModelShape shape{train_set.input_dim(), args.flags.hidden,
                         train_set.num_classes()};
  const TrainConfig config = args.flags.config();

  Provenance p{{"command", "train"},
               {"mode", args.mode},
               {"train", args.train_path},
               {"valid", args.valid_path},
               {"label_fraction", fmt(args.label_fraction)},
               {"labeled_examples", std::to_string(train_set.labeled_count())},
               {"input_dim", std::to_string(shape.input_dim)},
               {"classes", std::to_string(shape.num_classes)},
               {"kernels", kernels::backend_name(kernels::active_backend())}};
  args.flags.describe(p);
  echo(p);

  fs::create_directories(args.out_dir);
  TrainLogWriter writer((fs::path(args.out_dir) / "train_log.csv").string(), p);
  const EpochCallback on_epoch = [&writer](const EpochRecord& r) { writer.append(r); };

  TrainResult result;
  if (args.mode == "supervised") {
    result = train_supervised_baseline(shape, train_set, valid_set, config, on_epoch);
  } else {
    const TrainingMode mode = args.mode == "autoencoder"
                                  ? TrainingMode::kAutoencoderOnly
                                  : TrainingMode::kSemiSupervised;
    Rng init_rng(Rng::derive(config.seed, kInitStream));
    result = train(ModelParams::init(shape, init_rng), train_set, valid_set, config,
                   mode, on_epoch);
  }

  const std::string ckpt = (fs::path(args.out_dir) / "model.ckpt").string();
  save_checkpoint(result.best, ckpt);
  std::cout << "best validation accuracy " << fmt(result.best_accuracy, "%.6f")
            << " at epoch " << result.best_epoch << "\n";
  std::cout << "checkpoint: " << ckpt << "\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model_path, data_path, phones_path, out_path;
};

void run_eval(const EvalArgs& args) {
  const ModelParams params = load_checkpoint(args.model_path);
  const StackedDataset ds = load_dataset(args.data_path);
  const CollapseMap map = args.phones_path.empty()
                              ? CollapseMap::identity(ds.num_classes())
                              : load_collapse_map(args.phones_path);
  if (map.num_sources() != params.shape.num_classes) {
    throw ConfigError("model predicts " + std::to_string(params.shape.num_classes) +
                      " classes but the collapse map has " +
                      std::to_string(map.num_sources()) + " sources");
  }

  const std::vector<std::int32_t> preds = predict(params, ds);
  const std::vector<std::int32_t> refs = reference_labels(ds);
  const EvalReport report = evaluate(preds, refs, map);

  Provenance p{{"command", "eval"},
               {"model", args.model_path},
               {"data", args.data_path},
               {"phones", args.phones_path.empty() ? "identity" : args.phones_path}};
  write_eval_report(report, map, p, args.out_path);
  echo(p);
  std::cout << "collapsed accuracy " << fmt(report.accuracy_collapsed, "%.6f")
            << " (raw " << fmt(report.accuracy_raw, "%.6f") << ") over "
            << report.num_frames << " frames\n";
  std::cout << "report: " << args.out_path << "\n";
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  std::vector<double> alphas{0.0, 1.0, 100.0};
  double step = 1e-5;
  double corruption = 0.2;
  double threshold = 1e-6;
  std::size_t input_dim = 8, hidden = 16, classes = 4;
  std::size_t batch = 6, labeled = 3;
  std::uint64_t seed = 2025;
  bool perturb = false;  // negative-control hook: break one gradient entry
};

void run_gradcheck(const GradcheckArgs& args) {
  if (args.labeled > args.batch) {
    throw ConfigError("--labeled cannot exceed --batch");
  }
  const ModelShape shape{args.input_dim, args.hidden, args.classes};
  Rng init_rng(Rng::derive(args.seed, kInitStream));
  const ModelParams params = ModelParams::init(shape, init_rng);

  // fixed random batch; inputs in [-1,1]
  std::vector<Vec> storage;
  Batch batch;
  Rng data_rng(Rng::derive(args.seed, 0x7));
  for (std::size_t i = 0; i < args.batch; ++i) {
    Vec x(shape.input_dim);
    for (double& v : x) v = data_rng.uniform(-1.0, 1.0);
    storage.push_back(std::move(x));
    batch.labels.push_back(
        i < args.labeled ? static_cast<std::int32_t>(data_rng.below(shape.num_classes))
                         : -1);
  }
  for (const Vec& v : storage) batch.inputs.emplace_back(v.data(), v.size());

  echo({{"command", "gradcheck"},
        {"shape", std::to_string(args.input_dim) + "x" + std::to_string(args.hidden) +
                      "x" + std::to_string(args.classes)},
        {"batch", std::to_string(args.batch)},
        {"labeled", std::to_string(args.labeled)},
        {"step", fmt(args.step)},
        {"corruption", fmt(args.corruption)},
        {"seed", std::to_string(args.seed)}});

  bool ok = true;
  const std::uint64_t corruption_seed = Rng::derive(args.seed, kCorruptStream);
  for (const double alpha : args.alphas) {
    LossOptions options;
    options.alpha = alpha;
    options.corruption_rate = args.corruption;

    Rng replay(corruption_seed);
    const BatchEval eval = batch_loss(params, batch, options, replay);
    Gradients analytic = backward(params, batch, eval.caches, options);
    if (args.perturb) analytic.w_enc(0, 0) += 1e-3;
    Gradients fd =
        finite_difference_gradient(params, batch, options, args.step, corruption_seed);

    std::string worst;
    const double err = max_relative_gradient_error(analytic, fd, &worst);
    std::cout << "alpha " << fmt(alpha) << ": max relative error " << fmt(err, "%.3e")
              << " (worst " << worst << ")\n";
    if (!(err < args.threshold)) ok = false;
  }
  if (ok) {
    std::cout << "gradient check passed (threshold " << fmt(args.threshold, "%.1e")
              << ")\n";
  } else {
    std::cout << "gradient check FAILED (threshold " << fmt(args.threshold, "%.1e")
              << ")\n";
    g_status = 2;
  }
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string train_path, valid_path, test_path;
  std::string phones_path;
  std::string out_dir;
  std::vector<double> fractions{0.01, 0.03, 0.05, 0.10, 0.20, 0.30};
  std::vector<double> alphas{100.0, 150.0, 400.0, 600.0, 900.0};
  std::size_t nn_hidden = 2000;
  std::size_t replicates = 1;
  std::size_t workers = 1;
  TrainFlags flags;
};

struct MethodOutcome {
  double valid_acc = std::nan("");
  double test_acc = std::nan("");
  double alpha = std::nan("");  // selected candidate (SSSAE only)
  bool ok = false;
};

struct CellOutcome {
  MethodOutcome nn;
  MethodOutcome sssae;
  std::vector<std::pair<double, MethodOutcome>> per_alpha;
  std::size_t labeled_count = 0;
  std::vector<std::string> notes;
};

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nan("");
  double total = 0.0;
  for (const double v : values) total += v;
  return total / static_cast<double>(values.size());
}

void run_sweep(const SweepArgs& args) {
  if (args.fractions.empty()) throw ConfigError("sweep needs at least one fraction");
  if (args.alphas.empty()) throw ConfigError("sweep needs at least one alpha candidate");
  if (args.replicates == 0) throw ConfigError("replicates must be >= 1");

  const StackedDataset train_full = load_dataset(args.train_path);
  const StackedDataset valid_set = load_dataset(args.valid_path);
  const StackedDataset test_set = load_dataset(args.test_path);
  const CollapseMap map = args.phones_path.empty()
                              ? CollapseMap::identity(train_full.num_classes())
                              : load_collapse_map(args.phones_path);

  std::vector<double> fractions = args.fractions;
  std::sort(fractions.begin(), fractions.end());
  std::vector<double> alphas = args.alphas;
  std::sort(alphas.begin(), alphas.end());

  Provenance p{{"command", "sweep"},
               {"train", args.train_path},
               {"valid", args.valid_path},
               {"test", args.test_path},
               {"phones", args.phones_path.empty() ? "identity" : args.phones_path},
               {"nn_hidden", std::to_string(args.nn_hidden)},
               {"replicates", std::to_string(args.replicates)},
               {"workers", std::to_string(args.workers)}};
  {
    std::ostringstream list;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      list << (i ? "," : "") << fmt(fractions[i]);
    }
    p.emplace_back("fractions", list.str());
    list.str("");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      list << (i ? "," : "") << fmt(alphas[i]);
    }
    p.emplace_back("alphas", list.str());
  }
  args.flags.describe(p);
  echo(p);

  const auto score = [&](const ModelParams& params,
                         const StackedDataset& ds) -> double {
    return evaluate(predict(params, ds), reference_labels(ds), map).accuracy_collapsed;
  };

  // one cell per (fraction, replicate); each derives every seed from the
  // master seed and the fraction/alpha VALUES, so cells are independent and
  // reproducible in isolation
  const std::size_t cell_count = fractions.size() * args.replicates;
  std::vector<CellOutcome> cells(cell_count);

  std::atomic<std::size_t> next_cell{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t cell = next_cell.fetch_add(1);
      if (cell >= cell_count) return;
      const double fraction = fractions[cell / args.replicates];
      const std::size_t replicate = cell % args.replicates;
      CellOutcome& out = cells[cell];

      const std::uint64_t fraction_seed =
          seed_for_fraction(args.flags.seed, fraction);
      const std::uint64_t replicate_seed = Rng::derive(fraction_seed, 1000 + replicate);

      StackedDataset split;
      try {
        split = split_labels(train_full, fraction,
                             Rng::derive(replicate_seed, kSplitStream));
        out.labeled_count = split.labeled_count();
      } catch (const Error& e) {
        out.notes.emplace_back(std::string("split failed: ") + e.what());
        continue;
      }

      // supervised baseline on the labeled subset
      try {
        TrainConfig nn_config = args.flags.config();
        nn_config.seed = Rng::derive(replicate_seed, kBaselineStream);
        const ModelShape nn_shape{split.input_dim(), args.nn_hidden,
                                  split.num_classes()};
        const TrainResult nn =
            train_supervised_baseline(nn_shape, split, valid_set, nn_config);
        out.nn.valid_acc = score(nn.best, valid_set);
        out.nn.test_acc = score(nn.best, test_set);
        out.nn.ok = true;
      } catch (const Error& e) {
        out.notes.emplace_back(std::string("nn failed: ") + e.what());
      }

      // SSSAE candidates; alpha selected on validation only, test scored
      // once for the winner
      std::optional<ModelParams> best_model;
      for (const double alpha : alphas) {
        MethodOutcome candidate;
        candidate.alpha = alpha;
        try {
          TrainConfig config = args.flags.config();
          config.alpha = alpha;
          config.seed = seed_for_alpha(replicate_seed, alpha);
          const ModelShape shape{split.input_dim(), args.flags.hidden,
                                 split.num_classes()};
          Rng init_rng(Rng::derive(config.seed, kInitStream));
          TrainResult result = train(ModelParams::init(shape, init_rng), split,
                                     valid_set, config);
          candidate.valid_acc = score(result.best, valid_set);
          candidate.ok = true;
          if (!out.sssae.ok || candidate.valid_acc > out.sssae.valid_acc) {
            out.sssae = candidate;
            best_model = std::move(result.best);
          }
        } catch (const Error& e) {
          out.notes.emplace_back("alpha " + fmt(alpha) + " failed: " + e.what());
        }
        out.per_alpha.emplace_back(alpha, candidate);
      }
      if (best_model) out.sssae.test_acc = score(*best_model, test_set);
    }
  };

  if (args.workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < args.workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  fs::create_directories(args.out_dir);
  const std::string detail_path = (fs::path(args.out_dir) / "sweep_detail.csv").string();
  const std::string table_path = (fs::path(args.out_dir) / "sweep.csv").string();
  const std::string curve_path = (fs::path(args.out_dir) / "curve.csv").string();

  std::ofstream detail(detail_path, std::ios::trunc);
  for (const auto& [key, value] : p) detail << "# " << key << " = " << value << "\n";
  detail << "fraction_pct,replicate,method,alpha,valid_acc,test_acc,status\n";

  std::ofstream table(table_path, std::ios::trunc);
  for (const auto& [key, value] : p) table << "# " << key << " = " << value << "\n";
  table << "fraction_pct,labeled_count,nn_valid_acc,nn_test_acc,sssae_valid_acc,"
           "sssae_test_acc,alpha\n";

  std::ofstream curve(curve_path, std::ios::trunc);
  for (const auto& [key, value] : p) curve << "# " << key << " = " << value << "\n";
  curve << "fraction_pct,nn_valid_acc,nn_test_acc,sssae_valid_acc,sssae_test_acc\n";

  bool any_failure = false;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const double pct = fractions[fi] * 100.0;
    std::vector<double> nn_valid, nn_test, sssae_valid, sssae_test;
    std::map<double, std::size_t> alpha_votes;
    std::size_t labeled_count = 0;

    for (std::size_t r = 0; r < args.replicates; ++r) {
      const CellOutcome& cell = cells[fi * args.replicates + r];
      labeled_count = std::max(labeled_count, cell.labeled_count);

      detail << fmt(pct) << ',' << r << ",nn,,"
             << (cell.nn.ok ? fmt(cell.nn.valid_acc, "%.6f") : "") << ','
             << (cell.nn.ok ? fmt(cell.nn.test_acc, "%.6f") : "") << ','
             << (cell.nn.ok ? "ok" : "error") << "\n";
      for (const auto& [alpha, candidate] : cell.per_alpha) {
        const bool selected = cell.sssae.ok && alpha == cell.sssae.alpha;
        detail << fmt(pct) << ',' << r << ",sssae," << fmt(alpha) << ','
               << (candidate.ok ? fmt(candidate.valid_acc, "%.6f") : "") << ','
               << (selected ? fmt(cell.sssae.test_acc, "%.6f") : "") << ','
               << (candidate.ok ? (selected ? "selected" : "ok") : "error") << "\n";
      }
      for (const std::string& note : cell.notes) {
        detail << fmt(pct) << ',' << r << ",note,,,," << note << "\n";
        any_failure = true;
      }

      if (cell.nn.ok) {
        nn_valid.push_back(cell.nn.valid_acc);
        nn_test.push_back(cell.nn.test_acc);
      } else {
        any_failure = true;
      }
      if (cell.sssae.ok) {
        sssae_valid.push_back(cell.sssae.valid_acc);
        sssae_test.push_back(cell.sssae.test_acc);
        ++alpha_votes[cell.sssae.alpha];
      } else {
        any_failure = true;
      }
    }

    // majority vote over replicates; ties fall to the smallest alpha
    double chosen_alpha = std::nan("");
    std::size_t best_votes = 0;
    for (const auto& [alpha, votes] : alpha_votes) {
      if (votes > best_votes) {
        best_votes = votes;
        chosen_alpha = alpha;
      }
    }

    const std::string row = fmt(pct) + "," + std::to_string(labeled_count) + "," +
                            fmt(mean_of(nn_valid), "%.6f") + "," +
                            fmt(mean_of(nn_test), "%.6f") + "," +
                            fmt(mean_of(sssae_valid), "%.6f") + "," +
                            fmt(mean_of(sssae_test), "%.6f") + "," + fmt(chosen_alpha);
    table << row << "\n";
    curve << fmt(pct) << ',' << fmt(mean_of(nn_valid), "%.6f") << ','
          << fmt(mean_of(nn_test), "%.6f") << ',' << fmt(mean_of(sssae_valid), "%.6f")
          << ',' << fmt(mean_of(sssae_test), "%.6f") << "\n";
    std::cout << "fraction " << fmt(pct) << "%: NN " << fmt(mean_of(nn_test), "%.4f")
              << " vs SSSAE " << fmt(mean_of(sssae_test), "%.4f") << " (alpha "
              << fmt(chosen_alpha) << ")\n";
  }

  std::cout << "table: " << table_path << "\n";
  std::cout << "curve: " << curve_path << "\n";
  if (any_failure) {
    std::cout << "sweep finished with failed sub-runs (see " << detail_path << ")\n";
    g_status = 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised sparse autoencoder for frame-based classification"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file with defaults for any flag");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "emit a synthetic frame table");
  synth_cmd->add_option("--out", synth.out, "output frame-table CSV")->required();
  synth_cmd->add_option("--out-valid", synth.out_valid,
                        "optional held-out validation table");
  synth_cmd->add_option("--out-test", synth.out_test, "optional held-out test table");
  synth_cmd->add_option("--valid-frames", synth.valid_frames,
                        "frames for the validation table");
  synth_cmd->add_option("--test-frames", synth.test_frames,
                        "frames for the test table");
  synth_cmd->add_option("--classes", synth.config.num_classes, "number of classes");
  synth_cmd->add_option("--dim", synth.config.feature_dim, "features per frame");
  synth_cmd->add_option("--frames", synth.config.num_frames, "total frames");
  synth_cmd->add_option("--frames-per-utt", synth.config.frames_per_utterance,
                        "frames per utterance");
  synth_cmd->add_option("--speakers", synth.config.num_speakers, "speaker count");
  synth_cmd->add_option("--min-segment", synth.config.min_segment_frames,
                        "shortest single-class segment");
  synth_cmd->add_option("--max-segment", synth.config.max_segment_frames,
                        "longest single-class segment");
  synth_cmd->add_option("--separation", synth.config.class_separation,
                        "class mean separation scale");
  synth_cmd->add_option("--noise", synth.config.noise, "per-coordinate noise sigma");
  synth_cmd->add_option("--speaker-shift", synth.config.speaker_shift,
                        "per-speaker offset sigma");
  synth_cmd->add_option("--seed", synth.config.seed, "generator seed");
  synth_cmd->callback([&synth]() { run_synth(synth); });

  PrepareArgs prepare;
  CLI::App* prepare_cmd =
      app.add_subcommand("prepare", "normalize, stack and cache frame tables");
  prepare_cmd->add_option("--train", prepare.train_path, "training frame table");
  prepare_cmd->add_option("--valid", prepare.valid_path, "validation frame table");
  prepare_cmd->add_option("--test", prepare.test_path, "test frame table");
  prepare_cmd->add_option("--phones", prepare.phones_path,
                          "collapse map defining the label inventory");
  prepare_cmd->add_option("--classes", prepare.num_classes,
                          "numeric label count (synthetic tables)");
  prepare_cmd->add_option("--left", prepare.left, "left context frames");
  prepare_cmd->add_option("--right", prepare.right, "right context frames");
  prepare_cmd->add_option("--clip", prepare.clip, "clamp range before rescaling");
  prepare_cmd->add_flag("--no-normalize", prepare.skip_normalize,
                        "skip per-speaker normalization");
  prepare_cmd->add_option("--out", prepare.out_dir, "cache directory")->required();
  prepare_cmd->callback([&prepare]() { run_prepare(prepare); });

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model on cached data");
  train_cmd->add_option("--train", train_args.train_path, "training cache")->required();
  train_cmd->add_option("--valid", train_args.valid_path, "validation cache")
      ->required();
  train_cmd->add_option("--out", train_args.out_dir, "output directory")->required();
  train_cmd->add_option("--label-fraction", train_args.label_fraction,
                        "fraction of training labels kept visible");
  train_cmd
      ->add_option("--mode", train_args.mode,
                   "sssae | supervised | autoencoder")
      ->check(CLI::IsMember({"sssae", "supervised", "autoencoder"}));
  add_train_flags(train_cmd, train_args.flags);
  train_cmd->callback([&train_args]() { run_train(train_args); });

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint on cached data");
  eval_cmd->add_option("--model", eval_args.model_path, "checkpoint")->required();
  eval_cmd->add_option("--data", eval_args.data_path, "dataset cache")->required();
  eval_cmd->add_option("--phones", eval_args.phones_path,
                       "collapse map (identity when omitted)");
  eval_cmd->add_option("--out", eval_args.out_path, "report CSV path")->required();
  eval_cmd->callback([&eval_args]() { run_eval(eval_args); });

  GradcheckArgs gradcheck;
  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "compare analytic gradients against central differences");
  gradcheck_cmd->add_option("--alpha", gradcheck.alphas, "alpha values to check");
  gradcheck_cmd->add_option("--step", gradcheck.step, "finite-difference step");
  gradcheck_cmd->add_option("--corruption", gradcheck.corruption, "corruption rate");
  gradcheck_cmd->add_option("--threshold", gradcheck.threshold, "pass threshold");
  gradcheck_cmd->add_option("--input", gradcheck.input_dim, "input dimension");
  gradcheck_cmd->add_option("--hidden", gradcheck.hidden, "hidden units");
  gradcheck_cmd->add_option("--classes", gradcheck.classes, "class count");
  gradcheck_cmd->add_option("--batch", gradcheck.batch, "batch size");
  gradcheck_cmd->add_option("--labeled", gradcheck.labeled, "labeled examples");
  gradcheck_cmd->add_option("--seed", gradcheck.seed, "seed");
  gradcheck_cmd->add_flag("--perturb", gradcheck.perturb,
                          "negative control: corrupt one analytic entry");
  gradcheck_cmd->callback([&gradcheck]() { run_gradcheck(gradcheck); });

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "label-fraction sweep with per-fraction alpha selection");
  sweep_cmd->add_option("--train", sweep.train_path, "training cache")->required();
  sweep_cmd->add_option("--valid", sweep.valid_path, "validation cache")->required();
  sweep_cmd->add_option("--test", sweep.test_path, "test cache")->required();
  sweep_cmd->add_option("--phones", sweep.phones_path,
                        "collapse map (identity when omitted)");
  sweep_cmd->add_option("--out", sweep.out_dir, "output directory")->required();
  sweep_cmd->add_option("--fractions", sweep.fractions, "labeled fractions")
      ->delimiter(',');
  sweep_cmd->add_option("--alphas", sweep.alphas, "alpha candidates")->delimiter(',');
  sweep_cmd->add_option("--nn-hidden", sweep.nn_hidden, "baseline hidden units");
  sweep_cmd->add_option("--replicates", sweep.replicates, "seeds per fraction");
  sweep_cmd->add_option("--workers", sweep.workers, "parallel sub-runs");
  add_train_flags(sweep_cmd, sweep.flags, /*with_alpha=*/false);
  sweep_cmd->callback([&sweep]() { run_sweep(sweep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_status;
}
