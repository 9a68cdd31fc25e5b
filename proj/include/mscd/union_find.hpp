#pragma once

#include <numeric>
#include <utility>
#include <vector>

namespace mscd {

// Disjoint sets with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(int n = 0) : parent_(n), size_(n, 1), count_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Returns false when a and b were already joined.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --count_;
    return true;
  }

  bool same(int a, int b) { return find(a) == find(b); }
  int component_size(int x) { return size_[find(x)]; }
  int components() const { return count_; }
  int size() const { return static_cast<int>(parent_.size()); }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  int count_;
};

}  // namespace mscd
