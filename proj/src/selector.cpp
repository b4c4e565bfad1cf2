#include "featpress/selector.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "featpress/errors.hpp"
#include "featpress/forest.hpp"

namespace featpress {

FeatureRanking rank_features(const FeatureTable& train, std::uint64_t seed) {
  if (train.n_rows() == 0) throw data_error("cannot rank on an empty table");
  if (train.n_classes() < 2) {
    throw data_error("ranking requires at least 2 classes");
  }
  ForestParams params;
  params.seed = seed;
  const ForestModel model = train_forest(train, params);

  FeatureRanking ranking;
  ranking.seed = seed;
  ranking.importance = feature_importance(model);
  ranking.order.resize(train.n_features());
  std::iota(ranking.order.begin(), ranking.order.end(), 0);
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (ranking.importance[a] != ranking.importance[b]) {
                       return ranking.importance[a] > ranking.importance[b];
                     }
                     return a < b;
                   });
  return ranking;
}

FeatureTable apply_selection(const FeatureTable& table,
                             const FeatureRanking& ranking, std::size_t k) {
  if (ranking.importance.size() != table.n_features()) {
    throw data_error("ranking width " +
                     std::to_string(ranking.importance.size()) +
                     " does not match table width " +
                     std::to_string(table.n_features()));
  }
  if (k < 1 || k > table.n_features()) {
    throw data_error("selection k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(table.n_features()) + "]");
  }
  const std::vector<std::size_t> keep(ranking.order.begin(),
                                      ranking.order.begin() + k);
  return take_columns(table, keep);
}

void write_ranking_csv(const FeatureRanking& ranking,
                       const std::vector<std::string>& feature_names,
                       const std::string& path) {
  if (feature_names.size() != ranking.importance.size()) {
    throw data_error("feature name list does not match ranking width");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << "feature,importance\n";
  for (std::size_t idx : ranking.order) {
    out << feature_names[idx] << ',' << format_double(ranking.importance[idx])
        << '\n';
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace featpress
