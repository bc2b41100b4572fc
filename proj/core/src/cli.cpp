#include "dotin/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dotin/bench.hpp"
#include "dotin/checkpoint.hpp"
#include "dotin/config.hpp"
#include "dotin/errors.hpp"
#include "dotin/trainer.hpp"

namespace dotin {
namespace fs = std::filesystem;
namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << text;
}

Config assemble_config(const std::string& file, const std::vector<std::string>& overrides) {
  Config config = file.empty() ? Config{} : Config::load(file);
  for (const auto& o : overrides) config.apply_override(o);
  return config;
}

// Restores the model written by `train` from its run directory.
DotinModel load_run(const fs::path& run, TrainConfig& config, GraphSet& data) {
  config = TrainConfig::from_config(Config::load(run / "config.cfg"));
  data = load_dataset(config);
  DotinModel model(config.model_spec(data), 0);
  load_checkpoint(model.params(), run / "checkpoint.bin");
  return model;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DOTIN graph learning toolkit", "dotin"};
  app.require_subcommand(1);
  app.footer("Config keys (flat `key = value` file, override with --set key=value):\n" +
             config_help());

  std::string config_file;
  std::vector<std::string> overrides;
  std::string runs_root = "runs";
  std::string run_name;
  std::string run_dir;
  std::optional<std::uint64_t> seed;

  auto* train = app.add_subcommand("train", "k-fold cross-validated training");
  train->add_option("--config", config_file, "config file")->check(CLI::ExistingFile);
  train->add_option("--set", overrides, "key=value override (repeatable)");
  train->add_option("--seed", seed, "run seed");
  train->add_option("--runs", runs_root, "root directory for run outputs");
  train->add_option("--name", run_name, "run name (default: run fingerprint)");

  auto* eval = app.add_subcommand("eval", "evaluate a trained run on its full dataset");
  eval->add_option("--run", run_dir, "run directory written by train")->required();

  std::vector<double> ratios;
  std::vector<std::string> strategies{"dotin", "random", "none"};
  std::vector<std::uint64_t> seeds;
  bool timing = false;
  auto* bench = app.add_subcommand("bench", "drop-ratio sweep with cost accounting");
  bench->add_option("--config", config_file, "config file")->check(CLI::ExistingFile);
  bench->add_option("--set", overrides, "key=value override (repeatable)");
  bench->add_option("--ratios", ratios, "drop ratios")->delimiter(',')->required();
  bench->add_option("--strategies", strategies, "dotin, random, none")->delimiter(',');
  bench->add_option("--seeds", seeds, "seeds (default: config seed)")->delimiter(',');
  bench->add_flag("--timing", timing, "measure training batches/sec");
  bench->add_option("--runs", runs_root, "root directory for run outputs");
  bench->add_option("--name", run_name, "run name (default: config fingerprint)");

  bool export_attentiveness = false;
  bool drop_plans = false;
  auto* analyze = app.add_subcommand("analyze", "attentiveness and drop-plan exports");
  analyze->add_option("--run", run_dir, "run directory written by train")->required();
  analyze->add_flag("--export-attentiveness", export_attentiveness,
                    "per-task attentiveness ranks (needs two tasks)");
  analyze->add_flag("--drop-plans", drop_plans, "per-stage drop plans");

  std::string out_dir;
  auto* make_data = app.add_subcommand("make-data", "write the configured dataset in TU format");
  make_data->add_option("--config", config_file, "config file")->check(CLI::ExistingFile);
  make_data->add_option("--set", overrides, "key=value override (repeatable)");
  make_data->add_option("--out", out_dir, "output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      Config raw = assemble_config(config_file, overrides);
      if (seed) raw.set("seed", std::to_string(*seed));
      const TrainConfig config = TrainConfig::from_config(raw);
      const GraphSet data = load_dataset(config);
      const fs::path dir = fs::path(runs_root) / (run_name.empty() ? config_fingerprint(config) : run_name);
      fs::create_directories(dir);
      DotinModel model(config.model_spec(data), 0);
      const RunReport report = run_cross_validation(config, data, &model);
      write_file(dir / "config.cfg", config.to_config().dump());
      write_file(dir / "report.csv", report.csv());
      write_checkpoint(model.params(), dir / "checkpoint.bin");
      out << data.name << ": " << data.size() << " graphs, " << data.num_classes << " classes\n"
          << report.summary() << "run directory: " << dir.string() << '\n';
    } else if (eval->parsed()) {
      TrainConfig config;
      GraphSet data;
      const DotinModel model = load_run(run_dir, config, data);
      const MetricReport report = evaluate(model, data.graphs, config, config.seed);
      for (const auto& [metric, value] : report.metrics) out << metric << " = " << value << '\n';
    } else if (bench->parsed()) {
      const TrainConfig config = TrainConfig::from_config(assemble_config(config_file, overrides));
      const GraphSet data = load_dataset(config);
      SweepOptions options;
      options.strategies = strategies;
      options.seeds = seeds.empty() ? std::vector<std::uint64_t>{config.seed} : seeds;
      options.measure_timing = timing;
      const auto records = sweep_drop_ratio(config, ratios, data, options);
      const fs::path dir = fs::path(runs_root) / (run_name.empty() ? config_fingerprint(config) : run_name);
      fs::create_directories(dir);
      write_file(dir / "config.cfg", config.to_config().dump());
      const std::string csv = bench_csv(records);
      write_file(dir / "bench.csv", csv);
      out << csv;
    } else if (analyze->parsed()) {
      if (!export_attentiveness && !drop_plans) {
        err << "error: analyze needs --export-attentiveness and/or --drop-plans\n";
        return kExitUsage;
      }
      TrainConfig config;
      GraphSet data;
      const DotinModel model = load_run(run_dir, config, data);
      if (export_attentiveness) {
        const AttentivenessRanks ranks = export_attentiveness_ranks(model, data.graphs);
        write_file(fs::path(run_dir) / "attentiveness.csv", ranks.csv);
        double sum = 0.0;
        std::size_t counted = 0;
        for (double r : ranks.spearman) {
          if (r == r) {
            sum += r;
            ++counted;
          }
        }
        out << "mean spearman(task1, task2) = " << (counted ? sum / static_cast<double>(counted) : 0.0)
            << " over " << counted << " graphs\n";
      }
      if (drop_plans) {
        write_file(fs::path(run_dir) / "drop_plans.csv", export_drop_plans(model, data.graphs, config.seed));
        out << "wrote " << (fs::path(run_dir) / "drop_plans.csv").string() << '\n';
      }
    } else if (make_data->parsed()) {
      const TrainConfig config = TrainConfig::from_config(assemble_config(config_file, overrides));
      const GraphSet data = load_dataset(config);
      fs::create_directories(out_dir);
      write_tu_dataset(data, out_dir);
      write_file(fs::path(out_dir) / (data.name + "_summary.csv"), summary_csv(data));
      out << "wrote " << data.size() << " graphs to " << out_dir << '\n';
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace dotin
