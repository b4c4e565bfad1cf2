#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "featpress/table.hpp"

namespace featpress {

// Importance-ordered feature indices fitted on training data. importance is
// indexed by original feature position and sums to 1; order sorts it
// descending with ties broken by ascending index.
struct FeatureRanking {
  std::vector<std::size_t> order;
  std::vector<double> importance;
  std::uint64_t seed = 0;
};

// Trains a default-parameter ranking forest with the given seed and ranks by
// mean decrease in Gini impurity. The ranking forest lives in its own seed
// domain, separate from any evaluation forest.
FeatureRanking rank_features(const FeatureTable& train, std::uint64_t seed);

// Keeps the top-k ranked features, columns reordered by rank.
FeatureTable apply_selection(const FeatureTable& table,
                             const FeatureRanking& ranking, std::size_t k);

// Two-column inspection export: feature name, importance, in rank order.
void write_ranking_csv(const FeatureRanking& ranking,
                       const std::vector<std::string>& feature_names,
                       const std::string& path);

}  // namespace featpress
