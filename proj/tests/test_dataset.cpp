#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "gsoup/dataset.hpp"
#include "gsoup/synth.hpp"

using namespace gsoup;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& body) { std::ofstream(p) << body; }

void write_features(const fs::path& p, int rows, int cols) {
  std::ofstream out(p, std::ios::binary);
  for (int i = 0; i < rows * cols; ++i) {
    const float v = static_cast<float>(i) * 0.25f;
    out.write(reinterpret_cast<const char*>(&v), sizeof(float));
  }
}

void write_tiny_dataset(const fs::path& dir) {
  write_text(dir / "meta.json", R"({"num_nodes": 4, "num_features": 3, "num_classes": 2})");
  write_text(dir / "edges.tsv", "0\t1\n1\t2\n2\t3\n");
  write_features(dir / "features.bin", 4, 3);
  write_text(dir / "labels.tsv", "0\n1\n0\n1\n");
  write_text(dir / "splits.json", R"({"train": [0, 1], "val": [2], "test": [3]})");
}

}  // namespace

TEST_CASE("load_dataset parses the canonical directory") {
  TempDir tmp("gsoup_ds_ok");
  write_tiny_dataset(tmp.path);
  Dataset ds = load_dataset(tmp.path);
  CHECK(ds.num_nodes() == 4);
  CHECK(ds.num_features() == 3);
  CHECK(ds.num_classes == 2);
  CHECK(ds.graph.num_stored_edges() == 6);  // 3 undirected edges, both directions
  CHECK(ds.features(1, 2) == doctest::Approx(1.25f));
  CHECK(ds.labels[2] == 0);
  CHECK(ds.splits.val.size() == 1);
}

TEST_CASE("one undirected edge line stores both directions") {
  TempDir tmp("gsoup_ds_sym");
  write_text(tmp.path / "meta.json",
             R"({"num_nodes": 2, "num_features": 1, "num_classes": 2})");
  write_text(tmp.path / "edges.tsv", "0\t1\n");
  write_features(tmp.path / "features.bin", 2, 1);
  write_text(tmp.path / "labels.tsv", "0\n1\n");
  write_text(tmp.path / "splits.json", R"({"train": [0], "val": [1], "test": []})");
  Dataset ds = load_dataset(tmp.path);
  CHECK(ds.graph.num_stored_edges() == 2);
}

TEST_CASE("loader errors carry file context") {
  TempDir tmp("gsoup_ds_err");
  write_tiny_dataset(tmp.path);

  SUBCASE("label count mismatch") {
    write_text(tmp.path / "labels.tsv", "0\n1\n0\n");
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path),
                         doctest::Contains("label count mismatch"), std::runtime_error);
  }
  SUBCASE("missing file") {
    fs::remove(tmp.path / "features.bin");
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("missing file"),
                         std::runtime_error);
  }
  SUBCASE("edge id out of range reports the line") {
    write_text(tmp.path / "edges.tsv", "0\t1\n1\t9\n");
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("edges.tsv:2"),
                         std::runtime_error);
  }
  SUBCASE("truncated features") {
    write_features(tmp.path / "features.bin", 4, 2);
    CHECK_THROWS_WITH_AS(load_dataset(tmp.path), doctest::Contains("truncated"),
                         std::runtime_error);
  }
  SUBCASE("overlapping splits rejected") {
    write_text(tmp.path / "splits.json", R"({"train": [0, 2], "val": [2], "test": [3]})");
    CHECK_THROWS(load_dataset(tmp.path));
  }
}

TEST_CASE("save_dataset round-trips") {
  TempDir tmp("gsoup_ds_rt");
  SbmConfig cfg;
  cfg.num_nodes = 60;
  cfg.num_communities = 3;
  cfg.p_in = 0.2;
  cfg.p_out = 0.02;
  cfg.seed = 5;
  Dataset ds = make_sbm_dataset(cfg);
  save_dataset(ds, tmp.path / "out");
  Dataset back = load_dataset(tmp.path / "out");
  CHECK(back.graph.col_indices == ds.graph.col_indices);
  CHECK(back.graph.row_offsets == ds.graph.row_offsets);
  CHECK((back.features - ds.features).cwiseAbs().maxCoeff() == 0.0f);
  CHECK(back.labels == ds.labels);
  CHECK(back.splits.train == ds.splits.train);
  CHECK(back.splits.val == ds.splits.val);
  CHECK(back.splits.test == ds.splits.test);
}

TEST_CASE("sbm generator is deterministic and stratified") {
  SbmConfig cfg;
  cfg.num_nodes = 200;
  cfg.num_communities = 4;
  cfg.seed = 11;
  Dataset a = make_sbm_dataset(cfg);
  Dataset b = make_sbm_dataset(cfg);
  CHECK(a.graph.col_indices == b.graph.col_indices);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0f);

  cfg.seed = 12;
  Dataset c = make_sbm_dataset(cfg);
  CHECK(a.graph.col_indices != c.graph.col_indices);

  // 60/20/20 stratified split, correct class counts per community of 50
  CHECK(a.splits.train.size() == 120);
  CHECK(a.splits.val.size() == 40);
  CHECK(a.splits.test.size() == 40);
  std::set<NodeId> train(a.splits.train.begin(), a.splits.train.end());
  int count_class0 = 0;
  for (NodeId v : a.splits.train)
    if (a.labels[static_cast<std::size_t>(v)] == 0) ++count_class0;
  CHECK(count_class0 == 30);
}

TEST_CASE("planetoid-style count splits") {
  SbmConfig cfg;
  cfg.num_nodes = 300;
  cfg.num_communities = 3;
  cfg.seed = 9;
  cfg.train_per_class = 10;
  cfg.val_count = 60;
  cfg.test_count = 90;
  Dataset ds = make_sbm_dataset(cfg);
  CHECK(ds.splits.train.size() == 30);
  CHECK(ds.splits.val.size() == 60);
  CHECK(ds.splits.test.size() == 90);
}
