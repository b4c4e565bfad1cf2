#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "featpress/codec.hpp"
#include "featpress/forest.hpp"
#include "featpress/pca.hpp"
#include "featpress/quantizer.hpp"
#include "featpress/selector.hpp"
#include "featpress/table.hpp"

namespace featpress {

// One sweep configuration. Stage order is fixed: selection, then PCA, then
// quantization; absent bits means the unquantized baseline configuration.
struct PipelineConfig {
  std::optional<int> selection_k;
  std::optional<double> pca_target;  // in (0, 1]
  std::optional<int> bits;           // in [1, 32]
  bool pca_standardize = true;
  ForestParams forest;
  std::uint64_t seed = 0;
};

struct TradeoffPoint {
  PipelineConfig config;
  double f1 = 0.0;
  StorageReport storage;
  double wall_time_seconds = 0.0;
  // Reduction against the raw untransformed test log, the end-to-end view;
  // reduction_vs_csv above isolates quantization against the same-stage
  // serialization.
  std::uint64_t raw_csv_bytes = 0;
  double reduction_vs_raw_csv = 1.0;
};

// Configurations whose F1 stays within epsilon of the unquantized baseline.
struct Region {
  double epsilon = 0.02;
  double baseline_f1 = 0.0;
  std::vector<std::size_t> members;  // indices into the point list
  double min_reduction = 1.0;
  double max_reduction = 1.0;
};

// Fitted artifacts of one configuration, exposed for leakage checks.
struct FittedPipeline {
  std::optional<FeatureRanking> ranking;
  std::optional<PcaModel> pca;
  std::optional<RangeModel> ranges;
};

struct RunOptions {
  std::optional<double> duration_seconds;     // overrides test timestamps
  bool weighted_f1 = false;
  int deflate_level = 6;
  const FeatureRanking* precomputed_ranking = nullptr;
  FittedPipeline* fitted_out = nullptr;
  std::vector<int>* predictions_out = nullptr;  // test-split predictions
};

// Fits every stage on the training split only, transforms both splits,
// trains/evaluates the forest on dequantized values when bits are set, and
// measures storage by sealing the test-split container.
TradeoffPoint run_config(const FeatureTable& train, const FeatureTable& test,
                         const PipelineConfig& config,
                         const RunOptions& options = {});

// Per-group variant: one forest per group key, storage micro-aggregated,
// predictions pooled before scoring.
TradeoffPoint run_config_grouped(const FeatureTable& train,
                                 const FeatureTable& test,
                                 const PipelineConfig& config,
                                 const RunOptions& options = {});

// One point per config, order preserved; configs may run concurrently and
// the result is identical to sequential execution.
std::vector<TradeoffPoint> sweep(const FeatureTable& train,
                                 const FeatureTable& test,
                                 const std::vector<PipelineConfig>& configs,
                                 int jobs = 1, const RunOptions& options = {});

// Baseline = the bits-absent point with no selection/PCA (or the group's
// bits-absent point when every config shares one stage setting).
Region operating_region(const std::vector<TradeoffPoint>& points,
                        double epsilon);

// Writes report.csv (fixed column order), report_raw.csv (raw-log framing)
// and report.svg (scatter with the region shaded) under dir.
void write_report(const std::vector<TradeoffPoint>& points,
                  const Region& region, const std::string& dir,
                  bool include_wall_time = false);

// The fixed header of report.csv.
std::string report_csv_header();
// One report.csv row, matching the header column for column.
std::string report_csv_row(const TradeoffPoint& point, bool include_wall_time);

}  // namespace featpress
