#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "shiftscope/data_model.hpp"

namespace shiftscope::testing {

/// Discrete dataset from rows of 1-based levels; every column gets `card` levels.
inline TabularDataset discrete_rows(std::initializer_list<std::vector<int>> rows, int card = 2,
                                    int labels = 2) {
  TabularDataset ds;
  const std::size_t d = rows.begin()->size();
  ds.schema = FeatureSchema::uniform_discrete(d, card, labels);
  for (const auto& r : rows) {
    for (int v : r) ds.values.push_back(v);
    ++ds.rows;
  }
  return ds;
}

inline TabularDataset with_labels(TabularDataset ds, std::vector<int> labels) {
  ds.labels = std::move(labels);
  return ds;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("shiftscope_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::string out;
  if (FILE* f = std::fopen(p.string().c_str(), "rb")) {
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
    std::fclose(f);
  }
  return out;
}

}  // namespace shiftscope::testing
