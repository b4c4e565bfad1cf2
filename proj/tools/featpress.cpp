// featpress: task-aware compression workbench for network feature logs.
// Subcommands cover synthetic data generation, splitting, compression to the
// .nfq container, evaluation of single configurations and full
// accuracy-vs-storage sweeps.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "featpress/codec.hpp"
#include "featpress/detail/rng.hpp"
#include "featpress/errors.hpp"
#include "featpress/experiment.hpp"
#include "featpress/forest.hpp"
#include "featpress/pca.hpp"
#include "featpress/quantizer.hpp"
#include "featpress/selector.hpp"
#include "featpress/table.hpp"

namespace fp = featpress;

namespace {

constexpr std::uint64_t kRankingSeedStream = 0x4a11aULL;
constexpr std::uint64_t kForestSeedStream = 0xf035ULL;

std::optional<std::string> opt_column(const std::string& name) {
  if (name.empty() || name == "none") return std::nullopt;
  return name;
}

int parse_int(const std::string& s, const std::string& flag) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw CLI::ValidationError(flag, "'" + s + "' is not an integer");
  }
  return v;
}

double parse_real(const std::string& s, const std::string& flag) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw CLI::ValidationError(flag, "'" + s + "' is not a number");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::optional<int>> opt_int_list(const std::string& s,
                                             const std::string& flag) {
  std::vector<std::optional<int>> out;
  for (const std::string& tok : split_list(s)) {
    if (tok == "none") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(parse_int(tok, flag));
    }
  }
  return out;
}

std::vector<std::optional<double>> opt_real_list(const std::string& s,
                                                 const std::string& flag) {
  std::vector<std::optional<double>> out;
  for (const std::string& tok : split_list(s)) {
    if (tok == "none") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(parse_real(tok, flag));
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fp::io_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fp::io_error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw fp::io_error("write failed for '" + path + "'");
}

// Shared ingestion / forest / config flags.
struct ColumnFlags {
  std::string label = "label";
  std::string timestamp = "none";
  std::string group = "none";

  void attach(CLI::App* cmd) {
    cmd->add_option("--label-column", label,
                    "Label column name; 'none' for unlabeled input")
        ->capture_default_str();
    cmd->add_option("--timestamp-column", timestamp,
                    "Timestamp column name; 'none' if absent")
        ->capture_default_str();
    cmd->add_option("--group-column", group,
                    "Group key column name (e.g., AS id); 'none' if absent")
        ->capture_default_str();
  }

  fp::FeatureTable load(const std::string& path) const {
    return fp::load_csv(path, opt_column(label), opt_column(timestamp),
                        opt_column(group));
  }
};

struct ForestFlags {
  int trees = 100;
  std::string max_features = "sqrt";
  int min_samples_split = 2;
  std::string max_depth = "none";

  void attach(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Number of trees in the forest")
        ->capture_default_str();
    cmd->add_option("--max-features", max_features,
                    "Features sampled per split: 'sqrt' or a count")
        ->capture_default_str();
    cmd->add_option("--min-samples-split", min_samples_split,
                    "Smallest node size still eligible for a split")
        ->capture_default_str();
    cmd->add_option("--max-depth", max_depth,
                    "Tree depth limit: 'none' or a count")
        ->capture_default_str();
  }

  fp::ForestParams params(std::uint64_t seed) const {
    fp::ForestParams p;
    p.n_trees = trees;
    if (max_features != "sqrt") {
      p.max_features_per_split = parse_int(max_features, "--max-features");
    }
    p.min_samples_split = min_samples_split;
    if (max_depth != "none") {
      p.max_depth = parse_int(max_depth, "--max-depth");
    }
    p.seed = fp::detail::derive_seed(seed, kForestSeedStream);
    return p;
  }
};

int run_synth(const std::string& out, const fp::SynthSpec& spec) {
  const fp::FeatureTable table = fp::synth_generate(spec);
  fp::write_csv(table, out);
  std::cerr << "wrote " << table.n_rows() << " rows x " << table.n_features()
            << " features to " << out << "\n";
  return 0;
}

std::string sidecar_path(const std::string& nfq_path) {
  return nfq_path + ".sidecar.csv";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "featpress - task-aware compression of network traffic feature logs"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand(
      "synth", "Generate a seeded synthetic feature log as CSV");
  fp::SynthSpec spec;
  std::string synth_out;
  synth->add_option("--classes", spec.n_classes, "Number of classes")
      ->capture_default_str();
  synth->add_option("--informative", spec.n_informative,
                    "Class-dependent features")
      ->capture_default_str();
  synth->add_option("--noise", spec.n_noise, "Class-independent features")
      ->capture_default_str();
  synth->add_option("--rows-per-class", spec.rows_per_class, "Rows per class")
      ->capture_default_str();
  synth->add_option("--separation", spec.separation,
                    "Class-mean spacing in within-class deviations")
      ->capture_default_str();
  synth->add_option("--heavy-tail", spec.heavy_tail_fraction,
                    "Fraction of informative features drawn log-normally")
      ->capture_default_str();
  synth->add_option("--rate", spec.record_rate_hz, "Record rate in Hz")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed, "Generator seed")
      ->capture_default_str();
  synth->add_option("-o,--output", synth_out, "Output CSV path")->required();

  // ---- split ----
  auto* split =
      app.add_subcommand("split", "Stratified train/test split of a CSV");
  std::string split_in, train_out, test_out;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 0;
  ColumnFlags split_cols;
  split->add_option("input", split_in, "Input CSV")->required();
  split->add_option("--test-fraction", test_fraction,
                    "Per-class test share in (0,1)")
      ->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--train-out", train_out, "Training split CSV path")
      ->required();
  split->add_option("--test-out", test_out, "Test split CSV path")->required();
  split_cols.attach(split);

  // ---- compress ----
  auto* compress = app.add_subcommand(
      "compress", "Quantize a CSV feature log into a .nfq container");
  std::string comp_in, comp_out;
  int comp_bits = 8;
  int comp_level = 6;
  std::string comp_select = "none", comp_pca = "none";
  bool comp_no_std = false;
  std::uint64_t comp_seed = 0;
  ColumnFlags comp_cols;
  compress->add_option("input", comp_in, "Input CSV")->required();
  compress->add_option("--bits", comp_bits, "Quantization bit width")
      ->check(CLI::Range(1, 32))
      ->capture_default_str();
  compress->add_option("--select-k", comp_select,
                       "Keep the top-k ranked features; 'none' to skip")
      ->capture_default_str();
  compress->add_option("--pca", comp_pca,
                       "PCA variance target in (0,1]; 'none' to skip")
      ->capture_default_str();
  compress->add_flag("--no-pca-standardize", comp_no_std,
                     "Center but do not z-score before PCA");
  compress->add_option("--level", comp_level, "DEFLATE level")
      ->check(CLI::Range(1, 9))
      ->capture_default_str();
  compress->add_option("--seed", comp_seed, "Seed for the ranking forest")
      ->capture_default_str();
  compress->add_option("-o,--output", comp_out, "Output .nfq path")->required();
  comp_cols.attach(compress);

  // ---- decompress ----
  auto* decompress = app.add_subcommand(
      "decompress", "Reconstruct a CSV of representative values from .nfq");
  std::string dec_in, dec_out;
  bool dec_no_sidecar = false;
  decompress->add_option("input", dec_in, "Input .nfq")->required();
  decompress->add_option("-o,--output", dec_out, "Output CSV path")->required();
  decompress->add_flag("--no-sidecar", dec_no_sidecar,
                       "Ignore any label sidecar next to the input");

  // ---- inspect ----
  auto* inspect =
      app.add_subcommand("inspect", "Dump the header of a .nfq container");
  std::string insp_in;
  inspect->add_option("input", insp_in, "Input .nfq")->required();

  // ---- rank ----
  auto* rank = app.add_subcommand(
      "rank", "Rank features by forest impurity importance");
  std::string rank_train, rank_out;
  std::uint64_t rank_seed = 0;
  ColumnFlags rank_cols;
  rank->add_option("--train", rank_train, "Training CSV")->required();
  rank->add_option("--seed", rank_seed, "Ranking forest seed")
      ->capture_default_str();
  rank->add_option("-o,--output", rank_out, "Output ranking CSV")->required();
  rank_cols.attach(rank);

  // ---- eval ----
  auto* eval = app.add_subcommand(
      "eval", "Run one pipeline configuration and print its tradeoff row");
  std::string eval_train, eval_test;
  std::string eval_bits = "none", eval_pca = "none", eval_select = "none";
  bool eval_no_std = false, eval_per_group = false, eval_time = false;
  std::string eval_f1 = "macro";
  std::string eval_duration = "none";
  std::uint64_t eval_seed = 0;
  ColumnFlags eval_cols;
  ForestFlags eval_forest;
  eval->add_option("--train", eval_train, "Training CSV")->required();
  eval->add_option("--test", eval_test, "Test CSV")->required();
  eval->add_option("--bits", eval_bits,
                   "Quantization bit width; 'none' for the lossless baseline")
      ->capture_default_str();
  eval->add_option("--pca", eval_pca, "PCA variance target; 'none' to skip")
      ->capture_default_str();
  eval->add_option("--select-k", eval_select,
                   "Top-k feature selection; 'none' to skip")
      ->capture_default_str();
  eval->add_flag("--no-pca-standardize", eval_no_std,
                 "Center but do not z-score before PCA");
  eval->add_option("--duration", eval_duration,
                   "Log duration in seconds for bits/s; 'none' uses timestamps")
      ->capture_default_str();
  eval->add_option("--f1", eval_f1, "F1 averaging: macro or weighted")
      ->check(CLI::IsMember({"macro", "weighted"}))
      ->capture_default_str();
  eval->add_flag("--per-group", eval_per_group,
                 "Train one forest per group key and pool the results");
  eval->add_flag("--measure-time", eval_time,
                 "Report measured wall time instead of 0");
  eval->add_option("--seed", eval_seed, "Root seed")->capture_default_str();
  eval_cols.attach(eval);
  eval_forest.attach(eval);

  // ---- sweep ----
  auto* sweep = app.add_subcommand(
      "sweep", "Sweep configurations and write report CSVs plus an SVG");
  std::string sweep_train, sweep_test, sweep_out;
  std::string bits_list = "none,32,16,8,4,2";
  std::string pca_list = "none";
  std::string select_list = "none";
  std::string sweep_duration = "none";
  std::string sweep_f1 = "macro";
  double epsilon = 0.02;
  int jobs = 1;
  bool sweep_no_std = false, sweep_time = false;
  std::uint64_t sweep_seed = 0;
  ColumnFlags sweep_cols;
  ForestFlags sweep_forest;
  sweep->add_option("--train", sweep_train, "Training CSV")->required();
  sweep->add_option("--test", sweep_test, "Test CSV")->required();
  sweep->add_option("--bits-list", bits_list,
                    "Comma list of bit widths; 'none' = unquantized")
      ->capture_default_str();
  sweep->add_option("--pca-list", pca_list,
                    "Comma list of PCA variance targets; 'none' = skip")
      ->capture_default_str();
  sweep->add_option("--select-list", select_list,
                    "Comma list of selection sizes; 'none' = skip")
      ->capture_default_str();
  sweep->add_option("--epsilon", epsilon,
                    "Max F1 drop for the operating region")
      ->capture_default_str();
  sweep->add_option("--jobs", jobs, "Concurrent configuration runs")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  sweep->add_option("--duration", sweep_duration,
                    "Log duration in seconds for bits/s; 'none' uses timestamps")
      ->capture_default_str();
  sweep->add_option("--f1", sweep_f1, "F1 averaging: macro or weighted")
      ->check(CLI::IsMember({"macro", "weighted"}))
      ->capture_default_str();
  sweep->add_flag("--no-pca-standardize", sweep_no_std,
                  "Center but do not z-score before PCA");
  sweep->add_flag("--measure-time", sweep_time,
                  "Report measured wall times instead of 0");
  sweep->add_option("--seed", sweep_seed, "Root seed")->capture_default_str();
  sweep->add_option("-o,--output", sweep_out, "Report directory")->required();
  sweep_cols.attach(sweep);
  sweep_forest.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) return run_synth(synth_out, spec);

    if (*split) {
      const fp::FeatureTable table = split_cols.load(split_in);
      const auto [train, test] =
          fp::stratified_split(table, test_fraction, split_seed);
      fp::write_csv(train, train_out, split_cols.label, split_cols.timestamp,
                    split_cols.group);
      fp::write_csv(test, test_out, split_cols.label, split_cols.timestamp,
                    split_cols.group);
      std::cerr << "train: " << train.n_rows() << " rows, test: "
                << test.n_rows() << " rows\n";
      return 0;
    }

    if (*compress) {
      fp::FeatureTable table = comp_cols.load(comp_in);
      if (comp_select != "none") {
        const int k = parse_int(comp_select, "--select-k");
        const fp::FeatureRanking ranking = fp::rank_features(
            table, fp::detail::derive_seed(comp_seed, kRankingSeedStream));
        table = fp::apply_selection(table, ranking, k);
      }
      if (comp_pca != "none") {
        const double target = parse_real(comp_pca, "--pca");
        const fp::PcaModel pca = fp::fit_pca(table, target, !comp_no_std);
        table = fp::project(table, pca);
      }
      const fp::RangeModel ranges = fp::fit_ranges(table);
      const fp::CodeTable codes = fp::encode(table, ranges, comp_bits);
      const std::vector<std::uint8_t> sealed =
          fp::seal(fp::pack(codes, ranges), comp_level);
      write_file(comp_out, sealed);
      if (table.has_labels() || table.has_timestamps() || table.has_groups()) {
        fp::FeatureTable sidecar;
        sidecar.row_count = table.n_rows();
        sidecar.labels = table.labels;
        sidecar.class_names = table.class_names;
        sidecar.timestamps = table.timestamps;
        sidecar.group_keys = table.group_keys;
        fp::write_csv(sidecar, sidecar_path(comp_out), comp_cols.label,
                      comp_cols.timestamp, comp_cols.group);
      }
      std::cerr << "sealed " << sealed.size() << " bytes to " << comp_out
                << "\n";
      return 0;
    }

    if (*decompress) {
      const fp::Container container = fp::open_container(read_file(dec_in));
      const auto [codes, ranges] = fp::unpack(container);
      fp::FeatureTable table = fp::decode(codes, ranges);
      std::string label_name = "label", ts_name = "timestamp",
                  group_name = "group";
      const std::string side = sidecar_path(dec_in);
      if (!dec_no_sidecar && std::filesystem::exists(side)) {
        std::ifstream probe(side);
        std::string header;
        std::getline(probe, header);
        if (!header.empty() && header.back() == '\r') header.pop_back();
        const std::vector<std::string> cols = split_list(header);
        // Sidecars are written by `compress`: label, then optional
        // timestamp/group columns.
        const fp::FeatureTable sidecar = fp::load_csv(
            side, cols.empty() ? std::optional<std::string>{} : cols[0],
            cols.size() > 1 ? std::optional<std::string>(cols[1]) : std::nullopt,
            cols.size() > 2 ? std::optional<std::string>(cols[2]) : std::nullopt);
        if (sidecar.n_rows() != table.n_rows()) {
          throw fp::data_error("sidecar row count does not match container");
        }
        table.labels = sidecar.labels;
        table.class_names = sidecar.class_names;
        table.timestamps = sidecar.timestamps;
        table.group_keys = sidecar.group_keys;
        if (!cols.empty()) label_name = cols[0];
        if (cols.size() > 1) ts_name = cols[1];
        if (cols.size() > 2) group_name = cols[2];
      }
      fp::write_csv(table, dec_out, label_name, ts_name, group_name);
      std::cerr << "decoded " << table.n_rows() << " rows to " << dec_out
                << "\n";
      return 0;
    }

    if (*inspect) {
      const std::vector<std::uint8_t> bytes = read_file(insp_in);
      const fp::Container container = fp::open_container(bytes);
      std::cout << "magic: NFQ1\n"
                << "version: " << static_cast<int>(container.version) << "\n"
                << "bits: " << container.bits << "\n"
                << "features: " << container.n_features() << "\n"
                << "rows: " << container.n_rows << "\n"
                << "payload_bytes: " << container.payload.size() << "\n"
                << "sealed_bytes: " << bytes.size() << "\n"
                << "feature,lo,hi\n";
      for (std::size_t c = 0; c < container.n_features(); ++c) {
        std::cout << container.feature_names[c] << ','
                  << fp::format_double(container.lo[c]) << ','
                  << fp::format_double(container.hi[c]) << "\n";
      }
      return 0;
    }

    if (*rank) {
      const fp::FeatureTable train = rank_cols.load(rank_train);
      const fp::FeatureRanking ranking = fp::rank_features(
          train, fp::detail::derive_seed(rank_seed, kRankingSeedStream));
      fp::write_ranking_csv(ranking, train.feature_names, rank_out);
      std::cerr << "wrote ranking for " << train.n_features()
                << " features to " << rank_out << "\n";
      return 0;
    }

    if (*eval) {
      const fp::FeatureTable train = eval_cols.load(eval_train);
      const fp::FeatureTable test = eval_cols.load(eval_test);
      fp::PipelineConfig config;
      if (eval_bits != "none") config.bits = parse_int(eval_bits, "--bits");
      if (eval_pca != "none") config.pca_target = parse_real(eval_pca, "--pca");
      if (eval_select != "none") {
        config.selection_k = parse_int(eval_select, "--select-k");
      }
      config.pca_standardize = !eval_no_std;
      config.seed = eval_seed;
      config.forest = eval_forest.params(eval_seed);
      fp::RunOptions options;
      options.weighted_f1 = (eval_f1 == "weighted");
      if (eval_duration != "none") {
        options.duration_seconds = parse_real(eval_duration, "--duration");
      }
      const fp::TradeoffPoint point =
          eval_per_group ? fp::run_config_grouped(train, test, config, options)
                         : fp::run_config(train, test, config, options);
      std::cout << fp::report_csv_header() << "\n"
                << fp::report_csv_row(point, eval_time) << "\n";
      return 0;
    }

    if (*sweep) {
      const fp::FeatureTable train = sweep_cols.load(sweep_train);
      const fp::FeatureTable test = sweep_cols.load(sweep_test);
      const auto bits = opt_int_list(bits_list, "--bits-list");
      const auto pcas = opt_real_list(pca_list, "--pca-list");
      const auto selects = opt_int_list(select_list, "--select-list");

      std::vector<fp::PipelineConfig> configs;
      for (const auto& sel : selects) {
        for (const auto& pca : pcas) {
          for (const auto& b : bits) {
            fp::PipelineConfig c;
            c.selection_k = sel;
            c.pca_target = pca;
            c.bits = b;
            c.pca_standardize = !sweep_no_std;
            c.seed = sweep_seed;
            c.forest = sweep_forest.params(sweep_seed);
            configs.push_back(c);
          }
        }
      }
      fp::RunOptions options;
      options.weighted_f1 = (sweep_f1 == "weighted");
      if (sweep_duration != "none") {
        options.duration_seconds = parse_real(sweep_duration, "--duration");
      }
      const std::vector<fp::TradeoffPoint> points =
          fp::sweep(train, test, configs, jobs, options);
      const fp::Region region = fp::operating_region(points, epsilon);
      fp::write_report(points, region, sweep_out, sweep_time);

      const bool any_selection = std::any_of(
          selects.begin(), selects.end(),
          [](const std::optional<int>& s) { return s.has_value(); });
      if (any_selection) {
        const fp::FeatureRanking ranking = fp::rank_features(
            train, fp::detail::derive_seed(sweep_seed, kRankingSeedStream));
        fp::write_ranking_csv(
            ranking, train.feature_names,
            (std::filesystem::path(sweep_out) / "ranking.csv").string());
      }
      std::cout << "epsilon,baseline_f1,n_members,min_reduction,max_reduction\n"
                << fp::format_double(region.epsilon) << ','
                << fp::format_double(region.baseline_f1) << ','
                << region.members.size() << ','
                << fp::format_double(region.min_reduction) << ','
                << fp::format_double(region.max_reduction) << "\n";
      std::cerr << "wrote " << points.size() << " points under " << sweep_out
                << "\n";
      return 0;
    }
  } catch (const fp::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fp::data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
