#include "featpress/forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "featpress/detail/parallel.hpp"
#include "featpress/detail/rng.hpp"
#include "featpress/errors.hpp"

namespace featpress {

namespace detail {

std::vector<std::size_t> bootstrap_indices(std::uint64_t forest_seed,
                                           int tree_index, std::size_t n_rows) {
  engine rng(derive_seed(forest_seed, 0xb007ULL + tree_index));
  std::vector<std::size_t> idx(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) idx[i] = uniform_index(rng, n_rows);
  return idx;
}

}  // namespace detail

namespace {

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;      // sum_left c^2/n_l + sum_right c^2/n_r, maximized
  double decrease = 0.0;    // n*gini(parent) - n_l*gini(l) - n_r*gini(r)
};

class TreeGrower {
 public:
  TreeGrower(const FeatureTable& data, const ForestParams& params,
             int n_classes, int mtry, std::uint64_t tree_seed,
             std::vector<std::size_t> sample)
      : data_(data),
        params_(params),
        n_classes_(n_classes),
        mtry_(mtry),
        rng_(detail::derive_seed(tree_seed, 0x57ee5ULL)),
        idx_(std::move(sample)),
        feature_pool_(data.n_features()),
        importance_(data.n_features(), 0.0) {
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
  }

  CartTree grow() {
    CartTree tree;
    tree.nodes.emplace_back();
    // Depth-first, left child first; node ids and RNG consumption follow
    // this fixed order, which pins the model bit-for-bit.
    struct Item {
      std::int32_t node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<Item> stack{{0, 0, idx_.size(), 0}};
    while (!stack.empty()) {
      const Item item = stack.back();
      stack.pop_back();

      std::vector<std::uint32_t> counts(n_classes_, 0);
      for (std::size_t i = item.begin; i < item.end; ++i) {
        ++counts[data_.labels[idx_[i]]];
      }
      const std::size_t n = item.end - item.begin;
      const bool pure =
          std::count_if(counts.begin(), counts.end(),
                        [](std::uint32_t c) { return c > 0; }) <= 1;
      const bool depth_capped =
          params_.max_depth && item.depth >= *params_.max_depth;
      Split split;
      if (!pure && !depth_capped &&
          n >= static_cast<std::size_t>(params_.min_samples_split)) {
        split = best_split(item.begin, item.end, counts);
      }
      if (!split.found) {
        tree.nodes[item.node].class_counts = std::move(counts);
        continue;
      }

      importance_[split.feature] +=
          split.decrease / static_cast<double>(idx_.size());

      const auto mid = std::partition(
          idx_.begin() + item.begin, idx_.begin() + item.end,
          [&](std::size_t row) {
            return data_.at(row, split.feature) <= split.threshold;
          });
      const std::size_t cut = static_cast<std::size_t>(mid - idx_.begin());

      const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
      const auto right_id = left_id + 1;
      tree.nodes[item.node].feature = split.feature;
      tree.nodes[item.node].threshold = split.threshold;
      tree.nodes[item.node].left = left_id;
      tree.nodes[item.node].right = right_id;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({right_id, cut, item.end, item.depth + 1});
      stack.push_back({left_id, item.begin, cut, item.depth + 1});
    }
    return tree;
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  Split best_split(std::size_t begin, std::size_t end,
                   const std::vector<std::uint32_t>& parent_counts) {
    const std::size_t n = end - begin;
    const std::size_t nf = data_.n_features();

    // Partial Fisher-Yates over a persistent pool; candidates are then
    // evaluated in ascending index order so equal scores resolve to the
    // lowest feature.
    for (int j = 0; j < mtry_; ++j) {
      const std::size_t pick =
          j + detail::uniform_index(rng_, static_cast<std::uint64_t>(nf - j));
      std::swap(feature_pool_[j], feature_pool_[pick]);
    }
    std::vector<int> candidates(feature_pool_.begin(),
                                feature_pool_.begin() + mtry_);
    std::sort(candidates.begin(), candidates.end());

    double parent_sq = 0.0;
    for (std::uint32_t c : parent_counts) {
      parent_sq += static_cast<double>(c) * static_cast<double>(c);
    }

    Split best;
    std::vector<std::pair<double, int>> column(n);
    std::vector<double> left_counts(n_classes_);
    for (int feature : candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = idx_[begin + i];
        column[i] = {data_.at(row, feature), data_.labels[row]};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      double left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const int cls = column[i].second;
        // Incremental sum of squared counts: (c+1)^2 = c^2 + 2c + 1.
        left_sq += 2.0 * left_counts[cls] + 1.0;
        left_counts[cls] += 1.0;
        if (!(column[i].first < column[i + 1].first)) continue;

        const auto nl = static_cast<double>(i + 1);
        const auto nr = static_cast<double>(n - i - 1);
        // Counts are integer-valued doubles, so every term below is exact and
        // the score depends only on the count pattern, not on row order.
        double right_sq = 0.0;
        for (int k = 0; k < n_classes_; ++k) {
          const double rc = static_cast<double>(parent_counts[k]) - left_counts[k];
          right_sq += rc * rc;
        }
        const double score = left_sq / nl + right_sq / nr;
        if (score > best.score) {
          double thr = column[i].first +
                       (column[i + 1].first - column[i].first) / 2.0;
          if (thr >= column[i + 1].first) thr = column[i].first;
          best.found = true;
          best.feature = feature;
          best.threshold = thr;
          best.score = score;
          best.decrease = score - parent_sq / static_cast<double>(n);
        }
      }
    }
    return best;
  }

  const FeatureTable& data_;
  const ForestParams& params_;
  int n_classes_;
  int mtry_;
  detail::engine rng_;
  std::vector<std::size_t> idx_;
  std::vector<int> feature_pool_;
  std::vector<double> importance_;
};

int leaf_majority(const TreeNode& leaf) {
  int best = 0;
  for (std::size_t c = 1; c < leaf.class_counts.size(); ++c) {
    if (leaf.class_counts[c] > leaf.class_counts[best]) {
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

ForestModel train_forest(const FeatureTable& train, const ForestParams& params,
                         int jobs) {
  if (train.n_rows() == 0) throw data_error("cannot train on an empty table");
  if (!train.has_labels() || train.n_classes() < 2) {
    throw data_error("training requires at least 2 classes");
  }
  if (params.n_trees < 1) throw data_error("n_trees must be positive");
  if (params.min_samples_split < 2) {
    throw data_error("min_samples_split must be >= 2");
  }
  const std::size_t nf = train.n_features();
  if (nf == 0) throw data_error("cannot train without features");
  int mtry = params.max_features_per_split
                 ? *params.max_features_per_split
                 : static_cast<int>(std::sqrt(static_cast<double>(nf)));
  if (params.max_features_per_split &&
      (*params.max_features_per_split < 1 ||
       *params.max_features_per_split > static_cast<int>(nf))) {
    throw data_error("max_features_per_split outside [1, n_features]");
  }
  mtry = std::clamp(mtry, 1, static_cast<int>(nf));

  ForestModel model;
  model.class_names = train.class_names;
  model.n_features = nf;
  model.trees.resize(params.n_trees);

  std::vector<std::vector<double>> per_tree_importance(params.n_trees);
  detail::parallel_for(params.n_trees, jobs, [&](std::size_t t) {
    const auto ti = static_cast<int>(t);
    TreeGrower grower(
        train, params, static_cast<int>(train.n_classes()), mtry,
        detail::derive_seed(params.seed, 0x7155ULL + t),
        detail::bootstrap_indices(params.seed, ti, train.n_rows()));
    model.trees[t] = grower.grow();
    per_tree_importance[t] = grower.importance();
  });

  model.importance_acc.assign(nf, 0.0);
  for (const auto& imp : per_tree_importance) {
    for (std::size_t c = 0; c < nf; ++c) model.importance_acc[c] += imp[c];
  }
  for (double& v : model.importance_acc) v /= params.n_trees;
  return model;
}

std::vector<int> predict(const ForestModel& model, const FeatureTable& table) {
  if (table.n_features() != model.n_features) {
    throw data_error("prediction schema width " +
                     std::to_string(table.n_features()) +
                     " does not match training width " +
                     std::to_string(model.n_features));
  }
  const std::size_t n_classes = model.class_names.size();
  std::vector<int> out(table.n_rows());
  std::vector<std::uint32_t> votes(n_classes);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const CartTree& tree : model.trees) {
      const TreeNode* node = &tree.nodes[0];
      while (!node->is_leaf()) {
        node = &tree.nodes[table.at(r, node->feature) <= node->threshold
                               ? node->left
                               : node->right];
      }
      ++votes[leaf_majority(*node)];
    }
    int best = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
      if (votes[c] > votes[best]) best = static_cast<int>(c);
    }
    out[r] = best;
  }
  return out;
}

namespace {

struct F1Parts {
  std::vector<int> classes;  // sorted class ids present in truth
  std::vector<double> f1;
  std::vector<std::size_t> support;
};

F1Parts per_class_f1(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw data_error("prediction/truth length mismatch");
  }
  if (truth.empty()) throw data_error("empty prediction/truth vectors");

  std::map<int, std::size_t> tp, fp, fn, support;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++support[truth[i]];
    if (pred[i] == truth[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  F1Parts parts;
  for (const auto& [cls, count] : support) {
    const double tp_c = static_cast<double>(tp[cls]);
    const double p_den = tp_c + static_cast<double>(fp[cls]);
    const double r_den = tp_c + static_cast<double>(fn[cls]);
    const double precision = p_den > 0.0 ? tp_c / p_den : 0.0;
    const double recall = r_den > 0.0 ? tp_c / r_den : 0.0;
    const double f1 = (precision + recall) > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    parts.classes.push_back(cls);
    parts.f1.push_back(f1);
    parts.support.push_back(count);
  }
  return parts;
}

}  // namespace

double macro_f1(std::span<const int> pred, std::span<const int> truth) {
  const F1Parts parts = per_class_f1(pred, truth);
  double sum = 0.0;
  for (double f : parts.f1) sum += f;
  return sum / static_cast<double>(parts.f1.size());
}

double weighted_f1(std::span<const int> pred, std::span<const int> truth) {
  const F1Parts parts = per_class_f1(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < parts.f1.size(); ++i) {
    sum += parts.f1[i] * static_cast<double>(parts.support[i]);
  }
  return sum / static_cast<double>(truth.size());
}

std::vector<double> feature_importance(const ForestModel& model) {
  std::vector<double> out = model.importance_acc;
  double total = 0.0;
  for (double v : out) total += v;
  if (total > 0.0) {
    for (double& v : out) v /= total;
  } else if (!out.empty()) {
    // No split ever reduced impurity; spread the mass evenly.
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
  }
  return out;
}

std::string dump_forest(const ForestModel& model) {
  std::ostringstream out;
  out << "forest trees=" << model.trees.size()
      << " features=" << model.n_features
      << " classes=" << model.class_names.size() << "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    out << "tree " << t << "\n";
    const auto& nodes = model.trees[t].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& node = nodes[i];
      if (node.is_leaf()) {
        out << "  node " << i << " leaf counts=";
        for (std::size_t c = 0; c < node.class_counts.size(); ++c) {
          out << (c ? "," : "") << node.class_counts[c];
        }
        out << "\n";
      } else {
        out << "  node " << i << " split feature=" << node.feature
            << " threshold=" << format_double(node.threshold)
            << " left=" << node.left << " right=" << node.right << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace featpress
