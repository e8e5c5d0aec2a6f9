#include "dasml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace dasml::ml {

namespace {

double gini(const std::array<std::int64_t, 2>& counts) {
  const double n = static_cast<double>(counts[0] + counts[1]);
  if (n == 0.0) return 0.0;
  const double p0 = counts[0] / n, p1 = counts[1] / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int majority(const std::array<std::int64_t, 2>& counts) {
  return counts[1] > counts[0] ? 1 : 0;
}

struct Builder {
  const Dataset& d;
  std::size_t min_leaf;
  std::vector<TreeNode> nodes;

  std::int32_t build(std::vector<std::size_t>& idx) {
    TreeNode node;
    for (std::size_t i : idx) node.counts[static_cast<std::size_t>(d.y[i])]++;

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_decrease = 1e-12;

    if (!pure && idx.size() >= 2 * min_leaf) {
      const double parent_gini = gini(node.counts);
      const double n = static_cast<double>(idx.size());
      std::vector<std::pair<double, int>> vals(idx.size());
      for (std::size_t f = 0; f < d.dim; ++f) {
        for (std::size_t i = 0; i < idx.size(); ++i)
          vals[i] = {d.x[idx[i]][f], d.y[idx[i]]};
        std::sort(vals.begin(), vals.end());
        std::array<std::int64_t, 2> left{0, 0};
        std::array<std::int64_t, 2> right = node.counts;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          left[static_cast<std::size_t>(vals[i].second)]++;
          right[static_cast<std::size_t>(vals[i].second)]--;
          if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
          const std::size_t nl = i + 1, nr = vals.size() - nl;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double decrease = parent_gini - (nl / n) * gini(left) - (nr / n) * gini(right);
          if (decrease > best_decrease) {
            best_decrease = decrease;
            best_feature = static_cast<int>(f);
            best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
          }
        }
      }
    }

    const std::int32_t id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(node);
    if (best_feature < 0) return id;  // leaf

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (d.x[i][static_cast<std::size_t>(best_feature)] < best_threshold)
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    nodes[id].left = build(left_idx);
    nodes[id].right = build(right_idx);
    return id;
  }
};

}  // namespace

const TreeNode& TreeModel::leaf_for(const std::vector<double>& v) const {
  std::int32_t i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(n.feature) >= v.size())
      throw DataError("tree: feature index outside input dimension");
    i = v[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)];
}

int TreeModel::predict_class(const std::vector<double>& v) const {
  return majority(leaf_for(v).counts);
}

std::size_t TreeModel::leaf_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes)
    if (node.is_leaf()) ++n;
  return n;
}

TreeModel train_tree(const Dataset& train, std::size_t min_leaf) {
  if (train.size() == 0) throw DataError("train_tree: empty dataset");
  train.validate();
  if (min_leaf == 0) min_leaf = 1;
  Builder b{train, min_leaf, {}};
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  b.build(idx);
  TreeModel m;
  m.nodes = std::move(b.nodes);
  return m;
}

double tree_accuracy(const TreeModel& tree, const Dataset& d) {
  if (d.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (tree.predict_class(d.x[i]) == d.y[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(d.size());
}

namespace {

// Compacts a tree so only reachable nodes remain, preserving preorder.
TreeModel compact(const TreeModel& t) {
  TreeModel out;
  std::function<std::int32_t(std::int32_t)> copy = [&](std::int32_t i) -> std::int32_t {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
    const std::int32_t id = static_cast<std::int32_t>(out.nodes.size());
    out.nodes.push_back(n);
    if (!n.is_leaf()) {
      out.nodes[static_cast<std::size_t>(id)].left = copy(n.left);
      out.nodes[static_cast<std::size_t>(id)].right = copy(n.right);
    }
    return id;
  };
  copy(0);
  return out;
}

}  // namespace

TreeModel prune_tree(const TreeModel& tree, const Dataset& holdout) {
  if (holdout.size() == 0) throw DataError("prune_tree: empty holdout");
  holdout.validate();
  TreeModel work = tree;

  while (true) {
    // Route every holdout sample and tally per-node hits and subtree
    // correctness under the current tree.
    const std::size_t nn = work.nodes.size();
    std::vector<std::int64_t> hit(nn, 0), hit_correct_as_leaf(nn, 0), correct_subtree(nn, 0);
    for (std::size_t i = 0; i < holdout.size(); ++i) {
      std::int32_t at = 0;
      while (true) {
        const TreeNode& n = work.nodes[static_cast<std::size_t>(at)];
        hit[static_cast<std::size_t>(at)]++;
        if (majority(n.counts) == holdout.y[i]) hit_correct_as_leaf[static_cast<std::size_t>(at)]++;
        if (n.is_leaf()) {
          if (majority(n.counts) == holdout.y[i]) {
            // credit correctness along the full path
            std::int32_t up = 0;
            const std::vector<double>& v = holdout.x[i];
            while (true) {
              correct_subtree[static_cast<std::size_t>(up)]++;
              const TreeNode& un = work.nodes[static_cast<std::size_t>(up)];
              if (un.is_leaf()) break;
              up = v[static_cast<std::size_t>(un.feature)] < un.threshold ? un.left : un.right;
            }
          }
          break;
        }
        at = holdout.x[i][static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
      }
    }

    const std::int64_t base_correct = correct_subtree[0];
    // Pick the collapse with the best resulting accuracy; ties go to the
    // deeper (larger-index) node so small spurious splits fall first.
    std::int64_t best_correct = base_correct - 1;
    std::int32_t best_node = -1;
    for (std::size_t v = 0; v < nn; ++v) {
      if (work.nodes[v].is_leaf()) continue;
      const std::int64_t after = base_correct - correct_subtree[v] + hit_correct_as_leaf[v];
      if (after >= base_correct && (best_node < 0 || after > best_correct ||
                                    (after == best_correct && static_cast<std::int32_t>(v) > best_node))) {
        best_correct = after;
        best_node = static_cast<std::int32_t>(v);
      }
    }
    if (best_node < 0) break;
    TreeNode& n = work.nodes[static_cast<std::size_t>(best_node)];
    n.feature = -1;
    n.left = n.right = -1;
    work = compact(work);
  }
  return work;
}

}  // namespace dasml::ml
