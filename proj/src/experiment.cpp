#include "featpress/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "featpress/detail/parallel.hpp"
#include "featpress/detail/rng.hpp"
#include "featpress/errors.hpp"

namespace featpress {

namespace {

constexpr std::uint64_t kRankingStream = 0x4a11aULL;

std::optional<double> table_duration(const FeatureTable& table) {
  if (table.n_rows() < 2 || !table.has_timestamps()) return std::nullopt;
  const auto [lo, hi] =
      std::minmax_element(table.timestamps.begin(), table.timestamps.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return std::nullopt;
  return span;
}

FeatureTable with_labels_of(const FeatureTable& decoded,
                            const FeatureTable& source) {
  FeatureTable out = decoded;
  out.labels = source.labels;
  out.class_names = source.class_names;
  out.timestamps = source.timestamps;
  out.group_keys = source.group_keys;
  return out;
}

void validate_config(const PipelineConfig& config) {
  if (config.bits && (*config.bits < 1 || *config.bits > 32)) {
    throw data_error("bits outside [1, 32]");
  }
  if (config.pca_target &&
      !(*config.pca_target > 0.0 && *config.pca_target <= 1.0)) {
    throw data_error("PCA variance target outside (0, 1]");
  }
  if (config.selection_k && *config.selection_k < 1) {
    throw data_error("selection k must be positive");
  }
}

struct StageResult {
  FeatureTable train;
  FeatureTable test;
  FittedPipeline fitted;
};

// selection -> PCA, fitted on train only.
StageResult apply_stages(const FeatureTable& train, const FeatureTable& test,
                         const PipelineConfig& config,
                         const RunOptions& options) {
  StageResult stage{train, test, {}};
  if (config.selection_k) {
    FeatureRanking ranking =
        options.precomputed_ranking
            ? *options.precomputed_ranking
            : rank_features(train,
                            detail::derive_seed(config.seed, kRankingStream));
    stage.train = apply_selection(stage.train, ranking, *config.selection_k);
    stage.test = apply_selection(stage.test, ranking, *config.selection_k);
    stage.fitted.ranking = std::move(ranking);
  }
  if (config.pca_target) {
    PcaModel pca =
        fit_pca(stage.train, *config.pca_target, config.pca_standardize);
    stage.train = project(stage.train, pca);
    stage.test = project(stage.test, pca);
    stage.fitted.pca = std::move(pca);
  }
  return stage;
}

TradeoffPoint run_single(const FeatureTable& train, const FeatureTable& test,
                         const PipelineConfig& config,
                         const RunOptions& options) {
  if (train.feature_names != test.feature_names) {
    throw data_error("train/test schema mismatch");
  }
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();

  StageResult stage = apply_stages(train, test, config, options);

  // Storage: the sealed test-split container against its own-stage lossless
  // serialization; the bits-absent configuration is the lossless baseline
  // itself, so its reduction is exactly 1.
  const BaselineSizes baselines =
      baseline_sizes(stage.test, options.deflate_level);
  FeatureTable model_train = stage.train;
  FeatureTable model_test = stage.test;
  TradeoffPoint point;
  point.config = config;
  point.storage.baseline_csv_bytes = baselines.csv_bytes;
  point.storage.baseline_f32_bytes = baselines.f32_bytes;
  if (config.bits) {
    RangeModel ranges = fit_ranges(stage.train);
    const CodeTable train_codes = encode(stage.train, ranges, *config.bits);
    const CodeTable test_codes = encode(stage.test, ranges, *config.bits);
    point.storage.lossy_bytes =
        seal(pack(test_codes, ranges), options.deflate_level).size();
    model_train = with_labels_of(decode(train_codes, ranges), stage.train);
    model_test = with_labels_of(decode(test_codes, ranges), stage.test);
    stage.fitted.ranges = std::move(ranges);
  } else {
    point.storage.lossy_bytes = baselines.csv_bytes;
  }
  point.storage.reduction_vs_csv =
      reduction_factor(static_cast<double>(point.storage.baseline_csv_bytes),
                       static_cast<double>(point.storage.lossy_bytes));
  point.storage.reduction_vs_f32 =
      reduction_factor(static_cast<double>(point.storage.baseline_f32_bytes),
                       static_cast<double>(point.storage.lossy_bytes));

  point.raw_csv_bytes = baseline_sizes(test, options.deflate_level).csv_bytes;
  point.reduction_vs_raw_csv =
      reduction_factor(static_cast<double>(point.raw_csv_bytes),
                       static_cast<double>(point.storage.lossy_bytes));

  const std::optional<double> duration = options.duration_seconds
                                             ? options.duration_seconds
                                             : table_duration(test);
  if (duration) {
    point.storage.bits_per_second =
        storage_rate(static_cast<double>(point.storage.lossy_bytes), *duration);
  }

  const ForestModel forest = train_forest(model_train, config.forest);
  std::vector<int> pred = predict(forest, model_test);
  point.f1 = options.weighted_f1 ? weighted_f1(pred, model_test.labels)
                                 : macro_f1(pred, model_test.labels);

  point.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (options.fitted_out) *options.fitted_out = std::move(stage.fitted);
  if (options.predictions_out) *options.predictions_out = std::move(pred);
  return point;
}

std::string opt_int_str(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}

std::string opt_double_str(const std::optional<double>& v) {
  return v ? format_double(*v) : "none";
}

}  // namespace

TradeoffPoint run_config(const FeatureTable& train, const FeatureTable& test,
                         const PipelineConfig& config,
                         const RunOptions& options) {
  return run_single(train, test, config, options);
}

TradeoffPoint run_config_grouped(const FeatureTable& train,
                                 const FeatureTable& test,
                                 const PipelineConfig& config,
                                 const RunOptions& options) {
  if (!train.has_groups() || !test.has_groups()) {
    throw data_error("per-group mode requires a group column on both splits");
  }
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();

  auto collect = [](const FeatureTable& t) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      groups[t.group_keys[r]].push_back(r);
    }
    return groups;
  };
  const auto train_groups = collect(train);
  const auto test_groups = collect(test);
  for (const auto& [key, rows] : test_groups) {
    if (!train_groups.count(key)) {
      throw data_error("test group '" + key + "' missing from training data");
    }
  }

  TradeoffPoint total;
  total.config = config;
  std::vector<int> pooled_pred, pooled_truth;
  std::uint64_t lossy = 0, base_csv = 0, base_f32 = 0, raw_csv = 0;
  for (const auto& [key, test_rows] : test_groups) {
    std::vector<int> pred;
    RunOptions sub = options;
    sub.precomputed_ranking = nullptr;  // rankings are per group
    sub.fitted_out = nullptr;
    sub.duration_seconds = std::nullopt;
    sub.predictions_out = &pred;
    const FeatureTable group_train = take_rows(train, train_groups.at(key));
    const FeatureTable group_test = take_rows(test, test_rows);
    const TradeoffPoint p = run_single(group_train, group_test, config, sub);
    lossy += p.storage.lossy_bytes;
    base_csv += p.storage.baseline_csv_bytes;
    base_f32 += p.storage.baseline_f32_bytes;
    raw_csv += p.raw_csv_bytes;
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    pooled_truth.insert(pooled_truth.end(), group_test.labels.begin(),
                        group_test.labels.end());
  }

  total.storage.lossy_bytes = lossy;
  total.storage.baseline_csv_bytes = base_csv;
  total.storage.baseline_f32_bytes = base_f32;
  total.raw_csv_bytes = raw_csv;
  total.storage.reduction_vs_csv = reduction_factor(
      static_cast<double>(base_csv), static_cast<double>(lossy));
  total.storage.reduction_vs_f32 = reduction_factor(
      static_cast<double>(base_f32), static_cast<double>(lossy));
  total.reduction_vs_raw_csv = reduction_factor(static_cast<double>(raw_csv),
                                                static_cast<double>(lossy));
  const std::optional<double> duration = options.duration_seconds
                                             ? options.duration_seconds
                                             : table_duration(test);
  if (duration) {
    total.storage.bits_per_second =
        storage_rate(static_cast<double>(lossy), *duration);
  }
  total.f1 = options.weighted_f1 ? weighted_f1(pooled_pred, pooled_truth)
                                 : macro_f1(pooled_pred, pooled_truth);
  total.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return total;
}

std::vector<TradeoffPoint> sweep(const FeatureTable& train,
                                 const FeatureTable& test,
                                 const std::vector<PipelineConfig>& configs,
                                 int jobs, const RunOptions& options) {
  if (configs.empty()) throw data_error("sweep needs at least one config");

  // The ranking depends only on (train, seed); share one fit across configs
  // when every config agrees on the seed.
  std::optional<FeatureRanking> shared_ranking;
  const bool any_selection =
      std::any_of(configs.begin(), configs.end(),
                  [](const PipelineConfig& c) { return c.selection_k.has_value(); });
  const bool same_seed =
      std::all_of(configs.begin(), configs.end(), [&](const PipelineConfig& c) {
        return c.seed == configs.front().seed;
      });
  if (any_selection && same_seed) {
    shared_ranking = rank_features(
        train, detail::derive_seed(configs.front().seed, kRankingStream));
  }

  std::vector<TradeoffPoint> points(configs.size());
  detail::parallel_for(configs.size(), jobs, [&](std::size_t i) {
    RunOptions sub = options;
    sub.fitted_out = nullptr;
    sub.predictions_out = nullptr;
    if (shared_ranking && configs[i].selection_k) {
      sub.precomputed_ranking = &*shared_ranking;
    }
    points[i] = run_single(train, test, configs[i], sub);
  });
  return points;
}

Region operating_region(const std::vector<TradeoffPoint>& points,
                        double epsilon) {
  if (epsilon < 0.0) throw data_error("epsilon must be non-negative");
  auto is_baseline_for = [](const TradeoffPoint& p, bool need_plain_stages) {
    if (p.config.bits) return false;
    if (!need_plain_stages) return true;
    return !p.config.selection_k && !p.config.pca_target;
  };

  std::size_t baseline = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (is_baseline_for(points[i], true)) {
      baseline = i;
      break;
    }
  }
  if (baseline == points.size()) {
    // Accept a stage-specific baseline when the whole sweep shares one
    // selection/PCA setting.
    const bool homogeneous = std::all_of(
        points.begin(), points.end(), [&](const TradeoffPoint& p) {
          return p.config.selection_k == points.front().config.selection_k &&
                 p.config.pca_target == points.front().config.pca_target;
        });
    if (homogeneous) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].config.bits) {
          baseline = i;
          break;
        }
      }
    }
  }
  if (baseline == points.size()) {
    throw data_error("operating region needs the bits-absent baseline point");
  }

  Region region;
  region.epsilon = epsilon;
  region.baseline_f1 = points[baseline].f1;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].f1 >= region.baseline_f1 - epsilon) {
      region.members.push_back(i);
      const double red = points[i].storage.reduction_vs_csv;
      if (region.members.size() == 1) {
        lo = hi = red;
      } else {
        lo = std::min(lo, red);
        hi = std::max(hi, red);
      }
    }
  }
  region.min_reduction = lo;
  region.max_reduction = hi;
  return region;
}

std::string report_csv_header() {
  return "selection_k,pca_target,bits,f1,lossy_bytes,baseline_csv_bytes,"
         "reduction_vs_csv,reduction_vs_f32,bits_per_second,"
         "wall_time_seconds";
}

std::string report_csv_row(const TradeoffPoint& p, bool include_wall_time) {
  std::string row;
  row += opt_int_str(p.config.selection_k);
  row += ',';
  row += opt_double_str(p.config.pca_target);
  row += ',';
  row += opt_int_str(p.config.bits);
  row += ',';
  row += format_double(p.f1);
  row += ',';
  row += std::to_string(p.storage.lossy_bytes);
  row += ',';
  row += std::to_string(p.storage.baseline_csv_bytes);
  row += ',';
  row += format_double(p.storage.reduction_vs_csv);
  row += ',';
  row += format_double(p.storage.reduction_vs_f32);
  row += ',';
  row += p.storage.bits_per_second ? format_double(*p.storage.bits_per_second)
                                   : std::string("none");
  row += ',';
  row += include_wall_time ? format_double(p.wall_time_seconds)
                           : std::string("0");
  return row;
}

namespace {

struct SeriesKey {
  std::optional<int> selection_k;
  std::optional<double> pca_target;
  bool operator<(const SeriesKey& o) const {
    if (selection_k != o.selection_k) return selection_k < o.selection_k;
    return pca_target < o.pca_target;
  }
  bool operator==(const SeriesKey& o) const {
    return selection_k == o.selection_k && pca_target == o.pca_target;
  }
};

std::string svg_report(const std::vector<TradeoffPoint>& points,
                       const Region& region) {
  constexpr double width = 680, height = 460;
  constexpr double ml = 70, mr = 30, mt = 40, mb = 55;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  double min_red = points[0].storage.reduction_vs_csv;
  double max_red = min_red;
  for (const auto& p : points) {
    min_red = std::min(min_red, p.storage.reduction_vs_csv);
    max_red = std::max(max_red, p.storage.reduction_vs_csv);
  }
  double x_lo = std::log10(std::max(min_red / 1.25, 1e-6));
  double x_hi = std::log10(std::max(max_red * 1.25, 2e-6));
  if (x_hi - x_lo < 0.1) {
    x_lo -= 0.05;
    x_hi += 0.05;
  }
  auto x_of = [&](double red) {
    return ml + (std::log10(red) - x_lo) / (x_hi - x_lo) * plot_w;
  };
  auto y_of = [&](double f1) { return mt + (1.0 - f1) * plot_h; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#ff7f0e", "#9467bd", "#8c564b",
                                  "#e377c2", "#17becf"};
  std::map<SeriesKey, std::vector<std::size_t>> series;
  for (std::size_t i = 0; i < points.size(); ++i) {
    series[{points[i].config.selection_k, points[i].config.pca_target}]
        .push_back(i);
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2
      << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">accuracy vs storage reduction</text>\n";

  if (!region.members.empty()) {
    const double rx0 = x_of(region.min_reduction);
    const double rx1 = x_of(region.max_reduction);
    svg << "<rect id=\"operating-region\" x=\"" << format_double(rx0)
        << "\" y=\"" << mt << "\" width=\""
        << format_double(std::max(rx1 - rx0, 2.0)) << "\" height=\"" << plot_h
        << "\" fill=\"#f2c464\" fill-opacity=\"0.25\"/>\n";
  }

  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\""
      << ml + plot_w << "\" y2=\"" << mt + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
  for (double f1 = 0.0; f1 <= 1.0001; f1 += 0.25) {
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << y_of(f1) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(f1) << "</text>\n";
  }
  for (double e = std::ceil(x_lo); e <= std::floor(x_hi) + 1e-9; e += 1.0) {
    const double red = std::pow(10.0, e);
    svg << "<text x=\"" << x_of(red) << "\" y=\"" << mt + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << format_double(red) << "x</text>\n";
  }
  svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">storage reduction vs lossless (log)</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << mt + plot_h / 2 << ")\">F1-score</text>\n";

  int color = 0;
  double legend_y = mt + 10;
  for (const auto& [key, idxs] : series) {
    const char* stroke = palette[color % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i : idxs) {
      svg << format_double(x_of(points[i].storage.reduction_vs_csv)) << ","
          << format_double(y_of(points[i].f1)) << " ";
    }
    svg << "\"/>\n";
    for (std::size_t i : idxs) {
      svg << "<circle cx=\""
          << format_double(x_of(points[i].storage.reduction_vs_csv))
          << "\" cy=\"" << format_double(y_of(points[i].f1))
          << "\" r=\"4\" fill=\"" << stroke << "\"/>\n";
    }
    std::string label = "select=" + opt_int_str(key.selection_k) +
                        " pca=" + opt_double_str(key.pca_target);
    svg << "<text x=\"" << ml + plot_w - 6 << "\" y=\"" << legend_y
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\""
        << stroke << "\">" << label << "</text>\n";
    legend_y += 15;
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

void write_report(const std::vector<TradeoffPoint>& points,
                  const Region& region, const std::string& dir,
                  bool include_wall_time) {
  if (points.empty()) throw data_error("report needs at least one point");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create report directory '" + dir + "'");

  const auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  {
    std::ofstream out(path("report.csv"), std::ios::binary);
    if (!out) throw io_error("cannot write report.csv under '" + dir + "'");
    out << report_csv_header() << '\n';
    for (const auto& p : points) {
      out << report_csv_row(p, include_wall_time) << '\n';
    }
  }
  {
    std::ofstream out(path("report_raw.csv"), std::ios::binary);
    if (!out) throw io_error("cannot write report_raw.csv under '" + dir + "'");
    out << "selection_k,pca_target,bits,f1,lossy_bytes,raw_csv_bytes,"
           "reduction_vs_raw_csv\n";
    for (const auto& p : points) {
      out << opt_int_str(p.config.selection_k) << ','
          << opt_double_str(p.config.pca_target) << ','
          << opt_int_str(p.config.bits) << ',' << format_double(p.f1) << ','
          << p.storage.lossy_bytes << ',' << p.raw_csv_bytes << ','
          << format_double(p.reduction_vs_raw_csv) << '\n';
    }
  }
  {
    std::ofstream out(path("report.svg"), std::ios::binary);
    if (!out) throw io_error("cannot write report.svg under '" + dir + "'");
    out << svg_report(points, region);
  }
}

}  // namespace featpress
