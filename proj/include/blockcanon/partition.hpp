#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blockcanon/errors.hpp"

namespace blockcanon {

// Ordered block sizes (n_1,...,n_K) with n = sum n_k. Immutable after
// construction; every other type in the library carries one of these.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw InvalidPartition("partition must contain at least one block");
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (int s : sizes_) {
      if (s < 1) throw InvalidPartition("block sizes must be >= 1, got " + std::to_string(s));
      offsets_.push_back(offsets_.back() + s);
    }
  }

  BlockPartition(std::initializer_list<int> sizes) : BlockPartition(std::vector<int>(sizes)) {}

  int block_count() const { return static_cast<int>(sizes_.size()); }
  int dim() const { return offsets_.back(); }
  int size(int k) const { return sizes_[k]; }
  // Row/column index where block k starts in the dense matrix.
  int offset(int k) const { return offsets_[k]; }
  const std::vector<int>& sizes() const { return sizes_; }

  // Row index where the contrast coordinates of block k start in rotated
  // coordinates. Layout after rotation: rows 0..K-1 hold the scaled block
  // means, then block k contributes size(k)-1 contrast rows.
  int contrast_offset(int k) const { return block_count() + offsets_[k] - k; }

  bool equal_sizes() const {
    for (int s : sizes_)
      if (s != sizes_.front()) return false;
    return true;
  }

  friend bool operator==(const BlockPartition& a, const BlockPartition& b) {
    return a.sizes_ == b.sizes_;
  }
  friend bool operator!=(const BlockPartition& a, const BlockPartition& b) { return !(a == b); }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
};

}  // namespace blockcanon
