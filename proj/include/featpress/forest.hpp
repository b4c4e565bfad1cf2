#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featpress/table.hpp"

namespace featpress {

struct ForestParams {
  int n_trees = 100;
  // nullopt -> floor(sqrt(n_features)), never below 1.
  std::optional<int> max_features_per_split;
  int min_samples_split = 2;
  std::optional<int> max_depth;  // nullopt -> unlimited
  std::uint64_t seed = 0;
};

// feature == -1 marks a leaf; leaves carry the class counts of their
// bootstrap reach, internal nodes the split and child ids.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> class_counts;

  bool is_leaf() const { return feature < 0; }
};

struct CartTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::vector<CartTree> trees;
  std::vector<std::string> class_names;  // label interning map from training
  std::size_t n_features = 0;
  // Mean over trees of reach-weighted Gini decrease, per feature, not yet
  // normalized; feature_importance() normalizes to sum 1.
  std::vector<double> importance_acc;
};

// Bagged CART with Gini impurity. Tree t draws its bootstrap sample and
// feature subsets from a substream derived from (params.seed, t), so the
// model is identical no matter how many threads build it.
ForestModel train_forest(const FeatureTable& train, const ForestParams& params,
                         int jobs = 1);

// Majority vote over the trees' leaf-majority classes; ties go to the lowest
// class id.
std::vector<int> predict(const ForestModel& model, const FeatureTable& table);

// Macro F1 over the classes present in truth; 0/0 precision or recall counts
// as 0.
double macro_f1(std::span<const int> pred, std::span<const int> truth);

// Support-weighted variant, reported behind a CLI flag.
double weighted_f1(std::span<const int> pred, std::span<const int> truth);

// Per-feature mean decrease in impurity, normalized to sum 1.
std::vector<double> feature_importance(const ForestModel& model);

// Debug dump: one line per node, per tree. Not a stability-guaranteed format.
std::string dump_forest(const ForestModel& model);

namespace detail {
// Exposed so tests can replay a tree's exact bootstrap sample.
std::vector<std::size_t> bootstrap_indices(std::uint64_t forest_seed,
                                           int tree_index, std::size_t n_rows);
}  // namespace detail

}  // namespace featpress
