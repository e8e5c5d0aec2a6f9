#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dasml/dataset.hpp"

namespace dasml::ml {

struct TreeNode {
  int feature = -1;          // -1 marks a leaf
  double threshold = 0.0;    // left when x[feature] < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::int64_t, 2> counts{0, 0};  // training samples per class
  bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // root at index 0

  const TreeNode& leaf_for(const std::vector<double>& v) const;
  int predict_class(const std::vector<double>& v) const;
  std::size_t node_count() const { return nodes.size(); }
  std::size_t leaf_count() const;
};

// Greedy binary CART on Gini impurity decrease; stops on pure nodes or
// min_leaf.
TreeModel train_tree(const Dataset& train, std::size_t min_leaf = 1);

// Reduced-error pruning: repeatedly collapse the internal node whose
// replacement by a majority leaf does not decrease holdout accuracy.
TreeModel prune_tree(const TreeModel& tree, const Dataset& holdout);

double tree_accuracy(const TreeModel& tree, const Dataset& d);

}  // namespace dasml::ml
