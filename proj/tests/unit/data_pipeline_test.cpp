#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "sssae/data_pipeline.hpp"
#include "sssae/error.hpp"

using namespace sssae;

namespace {

const char* kMapPath = SSSAE_SOURCE_DIR "/data/phones_48to39.txt";

std::string write_fixture(const std::string& name, const std::string& content) {
  std::ofstream out(name, std::ios::trunc);
  out << content;
  return name;
}

PhoneSet two_phones() { return PhoneSet({"ay", "bee"}); }

FrameTable table_from_csv(const std::string& name, const std::string& content,
                          const PhoneSet& phones) {
  return load_frame_table(write_fixture(name, content), phones);
}

}  // namespace

TEST_CASE("frame table loading") {
  SUBCASE("header-only file gives an empty table") {
    const FrameTable t =
        table_from_csv("ft_empty.csv", "utt,spk,idx,label,f0,f1\n", two_phones());
    CHECK(t.empty());
    CHECK(t.feature_dim() == 2);
  }

  SUBCASE("two utterances of five frames") {
    std::string csv = "utt,spk,idx,label,f0\n";
    for (int u = 0; u < 2; ++u) {
      for (int i = 0; i < 5; ++i) {
        csv += "u" + std::to_string(u) + ",s0," + std::to_string(i) + ",ay," +
               std::to_string(u * 10 + i) + ".5\n";
      }
    }
    const FrameTable t = table_from_csv("ft_two.csv", csv, two_phones());
    CHECK(t.size() == 10);
    CHECK(t.row(0).utterance == "u0");
    CHECK(t.row(5).utterance == "u1");
    CHECK(t.row(7).frame_index == 2);
    CHECK(t.row(7).features[0] == 12.5);
  }

  SUBCASE("wrong arity names the line") {
    const std::string csv = "utt,spk,idx,label,f0,f1\nu0,s0,0,ay,1.0\n";
    try {
      table_from_csv("ft_arity.csv", csv, two_phones());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("unknown label is rejected") {
    const std::string csv = "utt,spk,idx,label,f0\nu0,s0,0,zz,1.0\n";
    CHECK_THROWS_AS(table_from_csv("ft_label.csv", csv, two_phones()), ParseError);
  }

  SUBCASE("empty label means unlabeled") {
    const std::string csv = "utt,spk,idx,label,f0\nu0,s0,0,,1.0\n";
    const FrameTable t = table_from_csv("ft_unlab.csv", csv, two_phones());
    CHECK(t.row(0).label == -1);
  }

  SUBCASE("non-consecutive frame indices are rejected") {
    const std::string csv = "utt,spk,idx,label,f0\nu0,s0,0,ay,1.0\nu0,s0,2,ay,2.0\n";
    CHECK_THROWS_AS(table_from_csv("ft_idx.csv", csv, two_phones()), IntegrityError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_frame_table("does_not_exist.csv", two_phones()), IoError);
  }
}

TEST_CASE("frame table save/load round trip") {
  const SynthConfig config{.num_classes = 3,
                           .feature_dim = 4,
                           .num_frames = 50,
                           .frames_per_utterance = 10,
                           .num_speakers = 3,
                           .seed = 5};
  const FrameTable t = generate_synthetic_frames(config);
  save_frame_table(t, "ft_round.csv");
  const FrameTable u = load_frame_table("ft_round.csv", t.phones());
  REQUIRE(u.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(u.row(i).utterance == t.row(i).utterance);
    CHECK(u.row(i).label == t.row(i).label);
    for (std::size_t d = 0; d < t.feature_dim(); ++d) {
      REQUIRE(u.row(i).features[d] == t.row(i).features[d]);
    }
  }
}

TEST_CASE("speaker normalization") {
  SUBCASE("single frame becomes zero") {
    const FrameTable t = normalize_per_speaker(
        table_from_csv("nz_one.csv", "utt,spk,idx,label,f0\nu0,s0,0,ay,42.0\n",
                       two_phones()));
    CHECK(t.row(0).features[0] == 0.0);
  }

  SUBCASE("two frames become plus and minus one") {
    const std::string csv = "utt,spk,idx,label,f0\nu0,s0,0,ay,1.0\nu0,s0,1,ay,3.0\n";
    const FrameTable t =
        normalize_per_speaker(table_from_csv("nz_two.csv", csv, two_phones()));
    CHECK(t.row(0).features[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(t.row(1).features[0] == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("speakers are independent of block order") {
    const std::string forward =
        "utt,spk,idx,label,f0\n"
        "u0,sA,0,ay,1.0\nu0,sA,1,ay,5.0\n"
        "u1,sB,0,ay,100.0\nu1,sB,1,ay,104.0\n";
    const std::string reversed =
        "utt,spk,idx,label,f0\n"
        "u1,sB,0,ay,100.0\nu1,sB,1,ay,104.0\n"
        "u0,sA,0,ay,1.0\nu0,sA,1,ay,5.0\n";
    const FrameTable a =
        normalize_per_speaker(table_from_csv("nz_a.csv", forward, two_phones()));
    const FrameTable b =
        normalize_per_speaker(table_from_csv("nz_b.csv", reversed, two_phones()));
    CHECK(a.row(0).features[0] == b.row(2).features[0]);
    CHECK(a.row(3).features[0] == b.row(1).features[0]);
  }

  SUBCASE("idempotent within 1e-10") {
    const SynthConfig config{.num_classes = 3,
                             .feature_dim = 5,
                             .num_frames = 120,
                             .frames_per_utterance = 20,
                             .num_speakers = 4,
                             .seed = 9};
    const FrameTable once = normalize_per_speaker(generate_synthetic_frames(config));
    const FrameTable twice = normalize_per_speaker(once);
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (std::size_t d = 0; d < once.feature_dim(); ++d) {
        REQUIRE(std::abs(once.row(i).features[d] - twice.row(i).features[d]) < 1e-10);
      }
    }
  }

  SUBCASE("empty table is rejected") {
    const FrameTable t =
        table_from_csv("nz_empty.csv", "utt,spk,idx,label,f0\n", two_phones());
    CHECK_THROWS_AS(normalize_per_speaker(t), ConfigError);
  }
}

TEST_CASE("range compression lands in [-1,1]") {
  const std::string csv =
      "utt,spk,idx,label,f0\nu0,s0,0,ay,-9.0\nu0,s0,1,ay,2.0\nu0,s0,2,ay,9.0\n";
  const FrameTable t = compress_range(table_from_csv("rc.csv", csv, two_phones()));
  CHECK(t.row(0).features[0] == -1.0);
  CHECK(t.row(1).features[0] == 0.5);
  CHECK(t.row(2).features[0] == 1.0);
}

TEST_CASE("context stacking") {
  SUBCASE("single-frame utterance replicates the frame") {
    const std::string csv = "utt,spk,idx,label,f0,f1\nu0,s0,0,ay,1.5,-2.5\n";
    const StackedDataset ds =
        stack_context(table_from_csv("st_one.csv", csv, two_phones()), 5, 5);
    REQUIRE(ds.size() == 1);
    REQUIRE(ds.input_dim() == 22);
    const auto x = ds.input(0);
    for (std::size_t w = 0; w < 11; ++w) {
      CHECK(x[w * 2] == 1.5);
      CHECK(x[w * 2 + 1] == -2.5);
    }
  }

  SUBCASE("center of an 11-frame utterance is the plain concatenation") {
    std::string csv = "utt,spk,idx,label,f0\n";
    for (int i = 0; i < 11; ++i) {
      csv += "u0,s0," + std::to_string(i) + ",ay," + std::to_string(i) + ".0\n";
    }
    const StackedDataset ds =
        stack_context(table_from_csv("st_eleven.csv", csv, two_phones()), 5, 5);
    REQUIRE(ds.size() == 11);
    const auto x = ds.input(5);
    for (std::size_t w = 0; w < 11; ++w) CHECK(x[w] == static_cast<double>(w));
  }

  SUBCASE("three-frame utterance, first frame centered") {
    const std::string csv =
        "utt,spk,idx,label,f0\nu0,s0,0,ay,0.0\nu0,s0,1,ay,1.0\nu0,s0,2,ay,2.0\n";
    const StackedDataset ds =
        stack_context(table_from_csv("st_three.csv", csv, two_phones()), 5, 5);
    const auto x = ds.input(0);
    const double expected[11] = {0, 0, 0, 0, 0, 0, 1, 2, 2, 2, 2};
    for (std::size_t w = 0; w < 11; ++w) CHECK(x[w] == expected[w]);
  }

  SUBCASE("stacking preserves the frame count") {
    const SynthConfig config{.num_classes = 2,
                             .feature_dim = 3,
                             .num_frames = 137,
                             .frames_per_utterance = 25,
                             .num_speakers = 3,
                             .seed = 3};
    const FrameTable t = generate_synthetic_frames(config);
    CHECK(stack_context(t, 5, 5).size() == t.size());
  }

  SUBCASE("windows never cross utterance boundaries") {
    // disjoint constant sentinels per utterance
    std::string csv = "utt,spk,idx,label,f0\n";
    for (int i = 0; i < 4; ++i) csv += "u0,s0," + std::to_string(i) + ",ay,1.0\n";
    for (int i = 0; i < 4; ++i) csv += "u1,s0," + std::to_string(i) + ",bee,2.0\n";
    const StackedDataset ds =
        stack_context(table_from_csv("st_sentinel.csv", csv, two_phones()), 5, 5);
    for (std::size_t i = 0; i < 4; ++i) {
      for (const double v : ds.input(i)) REQUIRE(v == 1.0);
      for (const double v : ds.input(4 + i)) REQUIRE(v == 2.0);
    }
    CHECK(ds.reference_label(0) == 0);
    CHECK(ds.reference_label(4) == 1);
  }
}

TEST_CASE("label splitting") {
  const StackedDataset full = generate_synthetic(4, 6, 250, 0.1, 11);
  REQUIRE(full.size() == 1000);

  SUBCASE("exact count and partition") {
    const StackedDataset split = split_labels(full, 0.10, 77);
    CHECK(split.labeled_count() == 100);
    CHECK(split.size() == 1000);
    std::size_t hidden = 0;
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (!split.is_labeled(i)) {
        CHECK(split.training_label(i) == -1);
        CHECK(split.reference_label(i) >= 0);  // truth survives for evaluation
        ++hidden;
      } else {
        CHECK(split.training_label(i) == split.reference_label(i));
      }
    }
    CHECK(hidden == 900);
  }

  SUBCASE("fraction one is the identity") {
    const StackedDataset split = split_labels(full, 1.0, 77);
    CHECK(split.labeled_count() == split.size());
  }

  SUBCASE("same seed, same set") {
    const StackedDataset a = split_labels(full, 0.05, 123);
    const StackedDataset b = split_labels(full, 0.05, 123);
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a.is_labeled(i) == b.is_labeled(i));
    }
  }

  SUBCASE("bad fractions") {
    CHECK_THROWS_AS(split_labels(full, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_labels(full, 1.5, 1), ConfigError);
    CHECK_THROWS_AS(split_labels(full, 0.0001, 1), ConfigError);  // rounds to zero
  }

  SUBCASE("requires a fully labeled input") {
    const StackedDataset once = split_labels(full, 0.5, 5);
    CHECK_THROWS_AS(split_labels(once, 0.5, 5), ConfigError);
  }
}

TEST_CASE("collapse map") {
  SUBCASE("shipped 48->39 file") {
    const CollapseMap map = load_collapse_map(kMapPath);
    CHECK(map.num_sources() == 48);
    CHECK(map.num_targets() == 39);
    // a known merged pair folds together
    const std::int32_t aa = map.sources.index_of("aa");
    const std::int32_t ao = map.sources.index_of("ao");
    REQUIRE(aa >= 0);
    REQUIRE(ao >= 0);
    CHECK(map.to_target[aa] == map.to_target[ao]);
    // silence absorbs the closure symbols
    const std::int32_t sil = map.sources.index_of("sil");
    const std::int32_t cl = map.sources.index_of("cl");
    const std::int32_t vcl = map.sources.index_of("vcl");
    CHECK(map.to_target[cl] == map.to_target[sil]);
    CHECK(map.to_target[vcl] == map.to_target[sil]);
  }

  SUBCASE("48 distinct targets fail the cardinality check") {
    std::string content;
    for (int i = 0; i < 48; ++i) {
      content += "p" + std::to_string(i) + " q" + std::to_string(i) + "\n";
    }
    CHECK_THROWS_AS(load_collapse_map(write_fixture("cm_card.txt", content)),
                    IntegrityError);
  }

  SUBCASE("too few sources fail the completeness check") {
    std::string content;
    for (int i = 0; i < 39; ++i) {
      content += "p" + std::to_string(i) + " p" + std::to_string(i) + "\n";
    }
    CHECK_THROWS_AS(load_collapse_map(write_fixture("cm_short.txt", content)),
                    IntegrityError);
  }

  SUBCASE("duplicate source is a parse error") {
    CHECK_THROWS_AS(
        load_collapse_map(write_fixture("cm_dup.txt", "aa x\naa y\n")), ParseError);
  }

  SUBCASE("identity helper") {
    const CollapseMap id = CollapseMap::identity(5);
    CHECK(id.num_sources() == 5);
    CHECK(id.num_targets() == 5);
    CHECK(id.to_target[3] == 3);
  }
}

TEST_CASE("synthetic blobs") {
  SUBCASE("zero noise collapses each class to a point") {
    const StackedDataset ds = generate_synthetic(3, 4, 5, 0.0, 21);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto first = ds.input(c * 5);
      for (std::size_t i = 1; i < 5; ++i) {
        const auto other = ds.input(c * 5 + i);
        for (std::size_t d = 0; d < 4; ++d) REQUIRE(first[d] == other[d]);
      }
    }
  }

  SUBCASE("nearest centroid is perfect for well-separated classes") {
    const StackedDataset ds = generate_synthetic(2, 8, 100, 0.05, 31);
    Vec centroid_a(8, 0.0);
    Vec centroid_b(8, 0.0);
    for (std::size_t i = 0; i < 100; ++i) {
      for (std::size_t d = 0; d < 8; ++d) {
        centroid_a[d] += ds.input(i)[d] / 100.0;
        centroid_b[d] += ds.input(100 + i)[d] / 100.0;
      }
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      double da = 0.0;
      double db = 0.0;
      for (std::size_t d = 0; d < 8; ++d) {
        da += (ds.input(i)[d] - centroid_a[d]) * (ds.input(i)[d] - centroid_a[d]);
        db += (ds.input(i)[d] - centroid_b[d]) * (ds.input(i)[d] - centroid_b[d]);
      }
      const std::int32_t pred = da < db ? 0 : 1;
      REQUIRE(pred == ds.reference_label(i));
    }
  }

  SUBCASE("per_class zero gives an empty dataset") {
    CHECK(generate_synthetic(2, 4, 0, 0.1, 1).empty());
  }

  SUBCASE("features stay clamped") {
    const StackedDataset ds = generate_synthetic(3, 4, 50, 2.0, 77);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (const double v : ds.input(i)) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

TEST_CASE("synthetic frame tables validate and look structured") {
  const SynthConfig config{.num_classes = 4,
                           .feature_dim = 6,
                           .num_frames = 333,
                           .frames_per_utterance = 50,
                           .num_speakers = 5,
                           .seed = 88};
  const FrameTable t = generate_synthetic_frames(config);
  CHECK(t.size() == 333);
  t.validate();
  CHECK(t.phones().size() == 4);

  // determinism
  const FrameTable u = generate_synthetic_frames(config);
  for (std::size_t i = 0; i < t.size(); ++i) {
    REQUIRE(t.row(i).features[0] == u.row(i).features[0]);
    REQUIRE(t.row(i).label == u.row(i).label);
  }
}

TEST_CASE("dataset cache round trip is bit-exact") {
  StackedDataset ds = generate_synthetic(3, 7, 40, 0.2, 10);
  ds = split_labels(ds, 0.25, 555);
  save_dataset(ds, "cache_a.sds");
  const StackedDataset back = load_dataset("cache_a.sds");

  REQUIRE(back.size() == ds.size());
  CHECK(back.input_dim() == ds.input_dim());
  CHECK(back.num_classes() == ds.num_classes());
  CHECK(back.provenance().split_seed == 555);
  CHECK(back.provenance().labeled_fraction == 0.25);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.is_labeled(i) == ds.is_labeled(i));
    CHECK(back.reference_label(i) == ds.reference_label(i));
    const auto a = ds.input(i);
    const auto b = back.input(i);
    for (std::size_t d = 0; d < ds.input_dim(); ++d) REQUIRE(a[d] == b[d]);
  }

  // the writer itself is deterministic
  save_dataset(back, "cache_b.sds");
  std::ifstream fa("cache_a.sds", std::ios::binary);
  std::ifstream fb("cache_b.sds", std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                            std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
  std::remove("cache_a.sds");
  std::remove("cache_b.sds");
}

TEST_CASE("labeled subset keeps only visible labels") {
  StackedDataset ds = generate_synthetic(2, 4, 50, 0.1, 3);
  ds = split_labels(ds, 0.2, 9);
  const StackedDataset subset = ds.labeled_subset();
  CHECK(subset.size() == 20);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    CHECK(subset.is_labeled(i));
    CHECK(subset.training_label(i) >= 0);
  }
}
