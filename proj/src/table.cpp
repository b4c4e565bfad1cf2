#include "featpress/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "featpress/detail/rng.hpp"
#include "featpress/errors.hpp"

namespace featpress {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_cell(const std::string& cell, std::size_t row_1based,
                  const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw data_error("non-numeric cell '" + cell + "' in feature column '" +
                     column + "', row " + std::to_string(row_1based));
  }
  return v;
}

int intern_label(FeatureTable& table,
                 std::unordered_map<std::string, int>& ids,
                 const std::string& text) {
  auto it = ids.find(text);
  if (it != ids.end()) return it->second;
  const int id = static_cast<int>(table.class_names.size());
  table.class_names.push_back(text);
  ids.emplace(text, id);
  return id;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

FeatureTable load_csv(const std::string& path,
                      const std::optional<std::string>& label_column,
                      const std::optional<std::string>& timestamp_column,
                      const std::optional<std::string>& group_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header)) throw data_error("'" + path + "' is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  const std::vector<std::string> columns = split_fields(header);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (std::size_t j = i + 1; j < columns.size(); ++j) {
      if (columns[i] == columns[j]) {
        throw data_error("duplicate header name '" + columns[i] + "' in '" +
                         path + "'");
      }
    }
  }

  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t label_idx = npos, ts_idx = npos, group_idx = npos;
  auto locate = [&](const std::optional<std::string>& name,
                    const char* role) -> std::size_t {
    if (!name) return npos;
    auto it = std::find(columns.begin(), columns.end(), *name);
    if (it == columns.end()) {
      throw data_error("missing " + std::string(role) + " column '" + *name +
                       "' in '" + path + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
  };
  label_idx = locate(label_column, "label");
  ts_idx = locate(timestamp_column, "timestamp");
  group_idx = locate(group_column, "group");

  FeatureTable table;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i != label_idx && i != ts_idx && i != group_idx) {
      table.feature_names.push_back(columns[i]);
    }
  }

  std::unordered_map<std::string, int> label_ids;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    ++row;
    const std::vector<std::string> cells = split_fields(line);
    if (cells.size() != columns.size()) {
      throw data_error("row " + std::to_string(row) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(columns.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == label_idx) {
        table.labels.push_back(intern_label(table, label_ids, cells[i]));
      } else if (i == ts_idx) {
        table.timestamps.push_back(parse_cell(cells[i], row, columns[i]));
      } else if (i == group_idx) {
        table.group_keys.push_back(cells[i]);
      } else {
        table.values.push_back(parse_cell(cells[i], row, columns[i]));
      }
    }
  }
  table.row_count = row;
  return table;
}

void write_csv(const FeatureTable& table, const std::string& path,
               const std::string& label_name,
               const std::string& timestamp_name,
               const std::string& group_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write '" + path + "'");

  const std::size_t nf = table.n_features();
  for (std::size_t c = 0; c < nf; ++c) {
    if (c) out << ',';
    out << table.feature_names[c];
  }
  if (table.has_labels()) out << (nf ? "," : "") << label_name;
  if (table.has_timestamps()) out << ',' << timestamp_name;
  if (table.has_groups()) out << ',' << group_name;
  out << '\n';

  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < nf; ++c) {
      if (c) out << ',';
      out << format_double(table.at(r, c));
    }
    if (table.has_labels()) {
      out << (nf ? "," : "") << table.class_names[table.labels[r]];
    }
    if (table.has_timestamps()) out << ',' << format_double(table.timestamps[r]);
    if (table.has_groups()) out << ',' << table.group_keys[r];
    out << '\n';
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

std::string canonical_csv(const FeatureTable& table) {
  std::string out;
  const std::size_t nf = table.n_features();
  for (std::size_t c = 0; c < nf; ++c) {
    if (c) out += ',';
    out += table.feature_names[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < nf; ++c) {
      if (c) out += ',';
      out += format_double(table.at(r, c));
    }
    out += '\n';
  }
  return out;
}

FeatureTable take_rows(const FeatureTable& table,
                       const std::vector<std::size_t>& rows) {
  FeatureTable out;
  out.feature_names = table.feature_names;
  out.class_names = table.class_names;
  out.row_count = rows.size();
  const std::size_t nf = table.n_features();
  out.values.reserve(rows.size() * nf);
  for (std::size_t r : rows) {
    const double* src = table.values.data() + r * nf;
    out.values.insert(out.values.end(), src, src + nf);
    if (table.has_labels()) out.labels.push_back(table.labels[r]);
    if (table.has_timestamps()) out.timestamps.push_back(table.timestamps[r]);
    if (table.has_groups()) out.group_keys.push_back(table.group_keys[r]);
  }
  return out;
}

FeatureTable take_columns(const FeatureTable& table,
                          const std::vector<std::size_t>& cols) {
  FeatureTable out;
  out.labels = table.labels;
  out.class_names = table.class_names;
  out.timestamps = table.timestamps;
  out.group_keys = table.group_keys;
  out.row_count = table.n_rows();
  for (std::size_t c : cols) out.feature_names.push_back(table.feature_names[c]);
  out.values.reserve(table.n_rows() * cols.size());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c : cols) out.values.push_back(table.at(r, c));
  }
  return out;
}

std::pair<FeatureTable, FeatureTable> stratified_split(
    const FeatureTable& table, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw data_error("test fraction must lie in (0, 1)");
  }
  if (!table.has_labels()) throw data_error("split requires labels");

  std::vector<std::vector<std::size_t>> per_class(table.n_classes());
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    per_class[table.labels[r]].push_back(r);
  }
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].size() < 2) {
      throw data_error("class '" + table.class_names[c] +
                       "' has fewer than 2 rows");
    }
  }

  detail::engine rng(detail::derive_seed(seed, 0x50117ULL));
  std::vector<char> in_test(table.n_rows(), 0);
  for (auto& rows : per_class) {
    // +1e-9 tolerates the binary representation of decimal fractions
    // (0.3 * 10 evaluates just below 3).
    auto n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(rows.size()) + 1e-9));
    n_test = std::max<std::size_t>(n_test, 1);
    detail::shuffle(rows, rng);
    for (std::size_t i = 0; i < n_test; ++i) in_test[rows[i]] = 1;
  }

  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    (in_test[r] ? test_rows : train_rows).push_back(r);
  }
  if (train_rows.empty() || test_rows.empty()) {
    throw data_error("degenerate split: empty train or test");
  }
  return {take_rows(table, train_rows), take_rows(table, test_rows)};
}

FeatureTable synth_generate(const SynthSpec& spec) {
  if (spec.n_classes < 1 || spec.rows_per_class < 2 ||
      spec.n_informative + spec.n_noise < 1 || spec.n_informative < 0 ||
      spec.n_noise < 0 || !(spec.record_rate_hz > 0.0) ||
      spec.heavy_tail_fraction < 0.0 || spec.heavy_tail_fraction > 1.0 ||
      spec.separation < 0.0) {
    throw data_error("invalid synth spec");
  }

  const std::size_t n_features =
      static_cast<std::size_t>(spec.n_informative + spec.n_noise);
  const std::size_t n_rows =
      static_cast<std::size_t>(spec.n_classes) * spec.rows_per_class;
  const int n_heavy = static_cast<int>(
      std::floor(spec.heavy_tail_fraction * spec.n_informative));

  FeatureTable table;
  table.row_count = n_rows;
  for (int j = 0; j < spec.n_informative; ++j) {
    table.feature_names.push_back("sig" + std::to_string(j));
  }
  for (int j = 0; j < spec.n_noise; ++j) {
    table.feature_names.push_back("noise" + std::to_string(j));
  }
  table.values.assign(n_rows * n_features, 0.0);

  // Column-by-column generation from per-(feature, class) substreams: output
  // is a pure function of the spec regardless of how work is scheduled.
  for (std::size_t j = 0; j < n_features; ++j) {
    const bool informative = j < static_cast<std::size_t>(spec.n_informative);
    const bool heavy = informative && j < static_cast<std::size_t>(n_heavy);
    for (int c = 0; c < spec.n_classes; ++c) {
      detail::engine rng(detail::derive_seed(
          spec.seed, (static_cast<std::uint64_t>(j) << 20) |
                         static_cast<std::uint64_t>(c)));
      const double mean = informative ? spec.separation * c : 0.0;
      for (int i = 0; i < spec.rows_per_class; ++i) {
        const std::size_t row =
            static_cast<std::size_t>(c) * spec.rows_per_class + i;
        double v = mean + detail::normal01(rng);
        if (heavy) v = std::exp(v);
        table.values[row * n_features + j] = v;
      }
    }
  }

  for (int c = 0; c < spec.n_classes; ++c) {
    table.class_names.push_back("class" + std::to_string(c));
    for (int i = 0; i < spec.rows_per_class; ++i) table.labels.push_back(c);
  }
  table.timestamps.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    table.timestamps[r] = static_cast<double>(r) / spec.record_rate_hz;
  }
  return table;
}

}  // namespace featpress
