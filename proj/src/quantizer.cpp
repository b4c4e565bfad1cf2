#include "featpress/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "featpress/errors.hpp"

namespace featpress {

double max_level(int bits) { return std::ldexp(1.0, bits) - 1.0; }

RangeModel fit_ranges(const FeatureTable& train) {
  if (train.n_rows() == 0) throw data_error("cannot fit ranges on an empty table");
  const std::size_t nf = train.n_features();
  RangeModel model;
  model.feature_names = train.feature_names;
  model.lo.assign(nf, 0.0);
  model.hi.assign(nf, 0.0);
  for (std::size_t c = 0; c < nf; ++c) {
    double lo = train.at(0, c), hi = lo;
    for (std::size_t r = 1; r < train.n_rows(); ++r) {
      lo = std::min(lo, train.at(r, c));
      hi = std::max(hi, train.at(r, c));
    }
    model.lo[c] = lo;
    model.hi[c] = hi;
  }
  return model;
}

CodeTable encode(const FeatureTable& table, const RangeModel& ranges, int bits) {
  if (bits < 1 || bits > 32) {
    throw data_error("bit width " + std::to_string(bits) + " outside [1, 32]");
  }
  if (table.feature_names != ranges.feature_names) {
    throw data_error("feature schema mismatch between table and range model");
  }
  const double levels = max_level(bits);
  const std::size_t nf = table.n_features();

  CodeTable out;
  out.feature_names = table.feature_names;
  out.bits = bits;
  out.row_count = table.n_rows();
  out.codes.assign(table.n_rows() * nf, 0);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < nf; ++c) {
      const double lo = ranges.lo[c], hi = ranges.hi[c];
      if (!(hi > lo)) continue;  // constant feature: level 0
      const double t = (table.at(r, c) - lo) / (hi - lo) * levels;
      double q;
      if (t <= 0.0) {
        q = 0.0;
      } else if (t >= levels) {
        q = levels;
      } else {
        q = std::floor(t + 0.5);  // half away from zero on non-negative t
        q = std::min(q, levels);
      }
      out.codes[r * nf + c] = static_cast<std::uint64_t>(q);
    }
  }
  return out;
}

FeatureTable decode(const CodeTable& codes, const RangeModel& ranges) {
  if (codes.feature_names != ranges.feature_names) {
    throw data_error("feature schema mismatch between codes and range model");
  }
  if (codes.bits < 1 || codes.bits > 32) {
    throw data_error("bit width " + std::to_string(codes.bits) +
                     " outside [1, 32]");
  }
  const double levels = max_level(codes.bits);
  const auto limit = static_cast<std::uint64_t>(levels);
  const std::size_t nf = codes.n_features();

  FeatureTable out;
  out.feature_names = codes.feature_names;
  out.row_count = codes.n_rows();
  out.values.assign(codes.n_rows() * nf, 0.0);
  for (std::size_t r = 0; r < codes.n_rows(); ++r) {
    for (std::size_t c = 0; c < nf; ++c) {
      const std::uint64_t q = codes.at(r, c);
      if (q > limit) {
        throw data_error("corrupt code " + std::to_string(q) + " at row " +
                         std::to_string(r) + ", column '" +
                         codes.feature_names[c] + "' exceeds " +
                         std::to_string(codes.bits) + "-bit range");
      }
      const double lo = ranges.lo[c], hi = ranges.hi[c];
      out.values[r * nf + c] =
          (hi > lo) ? lo + static_cast<double>(q) * (hi - lo) / levels : lo;
    }
  }
  return out;
}

}  // namespace featpress
