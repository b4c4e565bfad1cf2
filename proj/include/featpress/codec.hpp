#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featpress/quantizer.hpp"
#include "featpress/table.hpp"

namespace featpress {

// In-memory container: schema + ranges + bit-packed codes. seal() turns it
// into the .nfq byte layout (header uncompressed, payload DEFLATE-coded);
// open_container() inverts it.
struct Container {
  std::uint8_t version = 1;
  int bits = 0;
  std::vector<std::string> feature_names;
  std::vector<double> lo;
  std::vector<double> hi;
  std::uint64_t n_rows = 0;
  std::vector<std::uint8_t> payload;  // raw bit-packed codes, not compressed

  std::size_t n_features() const { return feature_names.size(); }
};

struct BaselineSizes {
  std::uint64_t csv_bytes = 0;
  std::uint64_t f32_bytes = 0;
};

// End-to-end storage accounting for one sweep configuration.
struct StorageReport {
  std::uint64_t lossy_bytes = 0;         // sealed container size
  std::uint64_t baseline_csv_bytes = 0;  // DEFLATE of canonical CSV
  std::uint64_t baseline_f32_bytes = 0;  // DEFLATE of raw 32-bit reals
  double reduction_vs_csv = 1.0;
  double reduction_vs_f32 = 1.0;
  std::optional<double> bits_per_second;
};

// Codes packed row-major in feature order, LSB-first within each byte, final
// byte zero-padded.
Container pack(const CodeTable& codes, const RangeModel& ranges);
std::pair<CodeTable, RangeModel> unpack(const Container& container);

std::vector<std::uint8_t> seal(const Container& container, int level = 6);
Container open_container(std::span<const std::uint8_t> file_bytes);

// Sizes after DEFLATE of the two lossless serializations of the feature
// matrix (labels/timestamps excluded; they travel in an evaluation sidecar).
BaselineSizes baseline_sizes(const FeatureTable& table, int level = 6);

double reduction_factor(double baseline_bytes, double lossy_bytes);
double storage_rate(double bytes, double duration_seconds);

namespace detail {
// Raw DEFLATE (RFC 1951) wrappers around zlib.
std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> data,
                                      int level);
std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> data,
                                      std::size_t expected_size);
}  // namespace detail

}  // namespace featpress
