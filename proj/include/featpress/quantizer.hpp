#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "featpress/table.hpp"

namespace featpress {

// Per-feature quantization ranges fitted on the training split only. A fixed
// global range per feature is applied to everything encoded afterwards.
struct RangeModel {
  std::vector<std::string> feature_names;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t n_features() const { return feature_names.size(); }
};

// Quantized level indices at a fixed bit width. Codes are held in 64-bit
// integers so bits = 32 stays exact.
struct CodeTable {
  std::vector<std::string> feature_names;
  std::vector<std::uint64_t> codes;  // row-major, n_rows x n_features
  int bits = 0;
  std::size_t row_count = 0;

  std::size_t n_rows() const { return row_count; }
  std::size_t n_features() const { return feature_names.size(); }
  std::uint64_t at(std::size_t row, std::size_t col) const {
    return codes[row * feature_names.size() + col];
  }
};

// lo/hi = exact min/max over the training rows, no margin inflation.
RangeModel fit_ranges(const FeatureTable& train);

// Maps x onto 2^bits uniformly spaced levels of [lo, hi]; ties round half
// away from zero, out-of-range values clamp to the extreme levels, constant
// features encode as level 0.
CodeTable encode(const FeatureTable& table, const RangeModel& ranges, int bits);

// Reconstructs representative reals. Labels/timestamps are not carried by
// CodeTable; callers reattach them.
FeatureTable decode(const CodeTable& codes, const RangeModel& ranges);

// Largest level index at a bit width, as an exact double (2^bits - 1).
double max_level(int bits);

}  // namespace featpress
