#include "gsoup/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gsoup {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& file, const std::string& what) {
  throw std::runtime_error(file.string() + ": " + what);
}

[[noreturn]] void fail(const std::filesystem::path& file, int line, const std::string& what) {
  throw std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what);
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(file, "missing file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(file, std::string("invalid JSON: ") + e.what());
  }
  return j;
}

std::vector<std::pair<NodeId, NodeId>> read_edges(const std::filesystem::path& file,
                                                  NodeId num_nodes) {
  std::ifstream in(file);
  if (!in) fail(file, "missing file");
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long u = -1, v = -1;
    if (!(ss >> u >> v)) fail(file, lineno, "expected 'src<TAB>dst'");
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes)
      fail(file, lineno, "node id out of range [0, " + std::to_string(num_nodes) + ")");
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

MatrixF read_features(const std::filesystem::path& file, NodeId num_nodes, int num_features) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(file, "missing file");
  const std::size_t count =
      static_cast<std::size_t>(num_nodes) * static_cast<std::size_t>(num_features);
  MatrixF x(num_nodes, num_features);
  in.read(reinterpret_cast<char*>(x.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    fail(file, "truncated: expected " + std::to_string(count * sizeof(float)) + " bytes");
  char extra;
  if (in.read(&extra, 1))
    fail(file, "trailing bytes beyond num_nodes x num_features floats");
  if (!x.allFinite()) fail(file, "non-finite feature value");
  return x;
}

std::vector<std::int32_t> read_labels(const std::filesystem::path& file, NodeId num_nodes,
                                      int num_classes) {
  std::ifstream in(file);
  if (!in) fail(file, "missing file");
  std::vector<std::int32_t> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long y = -1;
    if (!(ss >> y)) fail(file, lineno, "expected an integer class label");
    if (y < 0 || y >= num_classes)
      fail(file, lineno, "label " + std::to_string(y) + " outside [0, " +
                             std::to_string(num_classes) + ")");
    labels.push_back(static_cast<std::int32_t>(y));
  }
  if (static_cast<NodeId>(labels.size()) != num_nodes)
    fail(file, "label count mismatch: " + std::to_string(labels.size()) + " labels for " +
                   std::to_string(num_nodes) + " nodes");
  return labels;
}

std::vector<NodeId> read_id_array(const json& j, const std::filesystem::path& file,
                                  const std::string& key, NodeId num_nodes) {
  if (!j.contains(key) || !j[key].is_array()) fail(file, "missing array \"" + key + "\"");
  std::vector<NodeId> ids;
  for (const auto& v : j[key]) {
    const long long id = v.get<long long>();
    if (id < 0 || id >= num_nodes)
      fail(file, "\"" + key + "\" id " + std::to_string(id) + " out of range");
    ids.push_back(static_cast<NodeId>(id));
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    fail(file, "\"" + key + "\" contains duplicate ids");
  return ids;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  const json meta = read_json(dir / "meta.json");
  for (const char* key : {"num_nodes", "num_features", "num_classes"})
    if (!meta.contains(key)) fail(dir / "meta.json", std::string("missing key \"") + key + "\"");
  Dataset ds;
  const auto num_nodes = meta["num_nodes"].get<long long>();
  const auto num_features = meta["num_features"].get<int>();
  ds.num_classes = meta["num_classes"].get<int>();
  if (num_nodes <= 0 || num_features <= 0 || ds.num_classes <= 0)
    fail(dir / "meta.json", "num_nodes, num_features, num_classes must be positive");
  const auto n = static_cast<NodeId>(num_nodes);

  ds.graph = graph_from_edges(n, read_edges(dir / "edges.tsv", n), /*symmetrize=*/true);
  ds.features = read_features(dir / "features.bin", n, num_features);
  ds.labels = read_labels(dir / "labels.tsv", n, ds.num_classes);

  const json splits = read_json(dir / "splits.json");
  ds.splits.train = read_id_array(splits, dir / "splits.json", "train", n);
  ds.splits.val = read_id_array(splits, dir / "splits.json", "val", n);
  ds.splits.test = read_id_array(splits, dir / "splits.json", "test", n);

  validate_dataset(ds);
  return ds;
}

void validate_dataset(const Dataset& ds) {
  validate_graph(ds.graph);
  if (!is_symmetric(ds.graph)) throw std::runtime_error("dataset: adjacency not symmetric");
  if (ds.features.rows() != ds.graph.num_nodes)
    throw std::runtime_error("dataset: feature rows != num_nodes");
  if (static_cast<NodeId>(ds.labels.size()) != ds.graph.num_nodes)
    throw std::runtime_error("dataset: label count mismatch");
  if (ds.splits.val.empty()) throw std::runtime_error("dataset: empty validation split");
  std::vector<std::int8_t> seen(static_cast<std::size_t>(ds.graph.num_nodes), 0);
  for (const auto* part : {&ds.splits.train, &ds.splits.val, &ds.splits.test}) {
    for (NodeId id : *part) {
      if (id < 0 || id >= ds.graph.num_nodes)
        throw std::runtime_error("dataset: split id out of range");
      if (seen[static_cast<std::size_t>(id)]++)
        throw std::runtime_error("dataset: splits not disjoint (node " + std::to_string(id) +
                                 ")");
    }
  }
  for (std::int32_t y : ds.labels)
    if (y < 0 || y >= ds.num_classes) throw std::runtime_error("dataset: label out of range");
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  validate_dataset(ds);
  std::filesystem::create_directories(dir);

  json meta;
  meta["num_nodes"] = ds.graph.num_nodes;
  meta["num_features"] = ds.num_features();
  meta["num_classes"] = ds.num_classes;
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";

  std::ofstream edges(dir / "edges.tsv");
  for (NodeId i = 0; i < ds.graph.num_nodes; ++i)
    for (EdgeIndex k = ds.graph.row_begin(i); k < ds.graph.row_end(i); ++k) {
      const NodeId j = ds.graph.col_indices[static_cast<std::size_t>(k)];
      if (i < j) edges << i << "\t" << j << "\n";  // one line per undirected edge
    }

  std::ofstream feats(dir / "features.bin", std::ios::binary);
  feats.write(reinterpret_cast<const char*>(ds.features.data()),
              static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(
                                                               ds.features.size())));

  std::ofstream labels(dir / "labels.tsv");
  for (std::int32_t y : ds.labels) labels << y << "\n";

  json splits;
  splits["train"] = ds.splits.train;
  splits["val"] = ds.splits.val;
  splits["test"] = ds.splits.test;
  std::ofstream(dir / "splits.json") << splits.dump() << "\n";
}

}  // namespace gsoup
