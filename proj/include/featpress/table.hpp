#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace featpress {

// Numeric feature matrix with interned per-row labels and optional
// timestamps / group keys. Treated as immutable once built: every transform
// takes it by const reference and returns a fresh table, so concurrent reads
// are safe.
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<double> values;            // row-major, n_rows x n_features
  std::vector<int> labels;               // interned ids; empty when unlabeled
  std::vector<std::string> class_names;  // id -> original label text
  std::vector<double> timestamps;        // empty or n_rows
  std::vector<std::string> group_keys;   // empty or n_rows

  std::size_t row_count = 0;

  std::size_t n_rows() const { return row_count; }
  std::size_t n_features() const { return feature_names.size(); }
  std::size_t n_classes() const { return class_names.size(); }

  double at(std::size_t row, std::size_t col) const {
    return values[row * feature_names.size() + col];
  }
  bool has_labels() const { return !labels.empty(); }
  bool has_timestamps() const { return !timestamps.empty(); }
  bool has_groups() const { return !group_keys.empty(); }
};

// Seeded stand-in for flow / device-window feature logs: per class,
// informative features cluster around class means spaced `separation` apart;
// a fraction of them is exponentiated to mimic size and interarrival stats.
struct SynthSpec {
  int n_classes = 2;
  int n_informative = 1;
  int n_noise = 0;
  int rows_per_class = 100;
  double separation = 1.0;
  double heavy_tail_fraction = 0.0;
  double record_rate_hz = 1.0;
  std::uint64_t seed = 0;
};

// Delimited-text ingestion. Designated columns are extracted; everything else
// must parse as a finite real and becomes a feature, in header order.
// label_column is nullopt only for deployment-style ingestion of unlabeled
// logs; the evaluation paths always pass one.
FeatureTable load_csv(const std::string& path,
                      const std::optional<std::string>& label_column,
                      const std::optional<std::string>& timestamp_column = {},
                      const std::optional<std::string>& group_column = {});

// Writes features plus whichever designated columns the table carries.
void write_csv(const FeatureTable& table, const std::string& path,
               const std::string& label_name = "label",
               const std::string& timestamp_name = "timestamp",
               const std::string& group_name = "group");

// Features-only serialization used as the lossless storage baseline: header
// line, one row per line, shortest decimal strings that round-trip the
// 64-bit values, '\n' endings.
std::string canonical_csv(const FeatureTable& table);

// Per class, floor(test_fraction * class_count) rows (minimum 1) go to the
// test split via a seeded shuffle; row order inside each output follows the
// original table.
std::pair<FeatureTable, FeatureTable> stratified_split(
    const FeatureTable& table, double test_fraction, std::uint64_t seed);

FeatureTable synth_generate(const SynthSpec& spec);

// Row-subset / column-subset helpers shared by the split, selection and
// per-group paths. Indices must be valid; order is preserved as given.
FeatureTable take_rows(const FeatureTable& table,
                       const std::vector<std::size_t>& rows);
FeatureTable take_columns(const FeatureTable& table,
                          const std::vector<std::size_t>& cols);

// Shortest decimal string that round-trips the 64-bit value.
std::string format_double(double v);

}  // namespace featpress
