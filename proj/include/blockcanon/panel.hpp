#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "blockcanon/errors.hpp"
#include "blockcanon/partition.hpp"

namespace blockcanon {

// A returns panel: N rows (days) by n columns (assets), no missing values.
struct ReturnsPanel {
  std::vector<std::string> asset_ids;  // column labels
  std::vector<std::string> dates;      // row labels
  Eigen::MatrixXd x;                   // N x n
};

// Maps asset ids to hierarchical dotted labels, e.g. "4010.1010.05"; prefix
// levels of the label induce nested groupings.
struct GroupMap {
  std::map<std::string, std::string> labels;
};

// First `level` dot-separated components of a label; level <= 0 collapses
// everything into one group. Labels shorter than the level are used whole.
inline std::string label_prefix(const std::string& label, int level) {
  if (level <= 0) return std::string();
  std::size_t pos = 0;
  for (int seen = 0; seen < level; ++seen) {
    pos = label.find('.', pos);
    if (pos == std::string::npos) return label;
    ++pos;
  }
  return label.substr(0, pos - 1);
}

// A panel ordered for block structure at one hierarchy level: assets sorted
// by full label (ties broken by id), blocks formed by the level prefix.
struct LevelPartition {
  BlockPartition partition;
  std::vector<int> order;                 // sorted position -> original panel column
  std::vector<std::string> sorted_ids;    // asset ids in sorted order
  std::vector<std::string> block_labels;  // level prefix per block
};

inline LevelPartition partition_at_level(const ReturnsPanel& panel, const GroupMap& groups,
                                         int level) {
  const int n = static_cast<int>(panel.asset_ids.size());
  if (n < 1) throw InputError("partition_at_level: empty panel");
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<std::string> full_labels(n);
  for (int i = 0; i < n; ++i) {
    const auto it = groups.labels.find(panel.asset_ids[i]);
    if (it == groups.labels.end())
      throw InputError("partition_at_level: asset '" + panel.asset_ids[i] +
                       "' is missing from the group map");
    full_labels[i] = it->second;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (full_labels[a] != full_labels[b]) return full_labels[a] < full_labels[b];
    return panel.asset_ids[a] < panel.asset_ids[b];
  });

  std::vector<int> sizes;
  std::vector<std::string> block_labels;
  std::vector<std::string> sorted_ids(n);
  for (int pos = 0; pos < n; ++pos) {
    sorted_ids[pos] = panel.asset_ids[order[pos]];
    const std::string prefix = label_prefix(full_labels[order[pos]], level);
    if (block_labels.empty() || prefix != block_labels.back()) {
      block_labels.push_back(prefix);
      sizes.push_back(1);
    } else {
      ++sizes.back();
    }
  }
  return LevelPartition{BlockPartition(std::move(sizes)), std::move(order),
                        std::move(sorted_ids), std::move(block_labels)};
}

// Panel columns rearranged into the sorted order of a LevelPartition.
inline Eigen::MatrixXd reorder_columns(const Eigen::MatrixXd& x, const std::vector<int>& order) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t pos = 0; pos < order.size(); ++pos) out.col(pos) = x.col(order[pos]);
  return out;
}

}  // namespace blockcanon
