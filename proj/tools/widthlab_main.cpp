#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "widthlab/experiment.hpp"
#include "widthlab/svg.hpp"

namespace {

using widthlab::ExperimentConfig;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string activation;
  std::optional<std::uint64_t> base_seed;
  std::optional<int> jobs;
  std::vector<int> widths;
  std::vector<std::uint64_t> seeds;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "INI config file");
  cmd->add_option("--out", flags->out_dir, "output directory (overrides config)");
  cmd->add_option("--activation", flags->activation,
                  "activation override: erf, tanh, or relu")
      ->check(CLI::IsMember({"erf", "tanh", "relu"}));
  cmd->add_option("--base-seed", flags->base_seed,
                  "base seed (precedence: this flag > WIDTHLAB_SEED > config)");
  cmd->add_option("--jobs", flags->jobs, "worker threads for sweeps");
  cmd->add_option("--widths", flags->widths,
                  "width list override, e.g. --widths 125 1000 8000")
      ->delimiter(',');
  cmd->add_option("--seeds", flags->seeds, "sweep seed list override")
      ->delimiter(',');
}

ExperimentConfig build_config(const CommonFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = widthlab::load_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.activation.empty()) {
    cfg.activation = widthlab::activation_from_string(flags.activation);
  }
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (!flags.widths.empty()) cfg.widths = flags.widths;
  if (!flags.seeds.empty()) cfg.seeds = flags.seeds;
  cfg.base_seed = widthlab::resolve_seed(cfg, flags.base_seed);
  cfg.validate();
  return cfg;
}

void echo(const std::vector<std::string>& files) {
  for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "widthlab: trains mean-field variational BNNs across widths, compares "
      "them to the exact infinite-width GP posterior, and renders the "
      "resulting CSVs"};
  app.require_subcommand(1);

  CommonFlags flags;
  int width = 0;
  std::uint64_t rep_seed = 0;

  auto add_cell_flags = [&](CLI::App* cmd) {
    add_common(cmd, &flags);
    cmd->add_option("--width", width, "hidden-layer width (default: first config width)");
    cmd->add_option("--seed", rep_seed, "repetition seed (default: first config seed)");
  };

  CLI::App* dataset = app.add_subcommand("dataset", "write dataset.csv (raw and standardized columns)");
  add_common(dataset, &flags);

  CLI::App* converge = app.add_subcommand(
      "converge", "train every (width, seed) cell; write convergence.csv and timing.csv");
  add_common(converge, &flags);

  CLI::App* prior_check = app.add_subcommand(
      "prior-check",
      "write prior moments per width vs the NNGP diagonal, plus upcrossing histograms");
  add_common(prior_check, &flags);

  CLI::App* posterior = app.add_subcommand(
      "posterior", "train one cell; write its predictive alongside prior and NNGP");
  add_cell_flags(posterior);

  CLI::App* param_density = app.add_subcommand(
      "param-density", "train one cell; write variational parameter quantiles");
  add_cell_flags(param_density);

  CLI::App* bound_cmd = app.add_subcommand(
      "bound-check", "train one cell (erf); write the mean-collapse bound report");
  add_cell_flags(bound_cmd);

  std::string plot_csv, plot_kind_name, plot_out, plot_title;
  CLI::App* plot = app.add_subcommand("plot", "render a widthlab CSV to SVG");
  plot->add_option("csv", plot_csv, "input CSV file")->required();
  plot->add_option("--kind", plot_kind_name, "convergence, band, or bars")
      ->required()
      ->check(CLI::IsMember({"convergence", "band", "bars"}));
  plot->add_option("--out", plot_out, "output SVG path (default: input with .svg)");
  plot->add_option("--title", plot_title, "plot title");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      if (plot_out.empty()) {
        plot_out = plot_csv;
        const std::size_t dot = plot_out.find_last_of('.');
        if (dot != std::string::npos) plot_out.resize(dot);
        plot_out += ".svg";
      }
      widthlab::svg::write_plot(plot_out, widthlab::csv::read_csv(plot_csv),
                                widthlab::svg::plot_kind_from_name(plot_kind_name),
                                plot_title);
      echo({plot_out});
      return 0;
    }

    ExperimentConfig cfg = build_config(flags);
    const bool cell_command =
        posterior->parsed() || param_density->parsed() || bound_cmd->parsed();
    if (cell_command) {
      if (width == 0) width = cfg.widths.front();
      // --seed not given: fall back to the first configured sweep seed.
      if (rep_seed == 0 && !posterior->count("--seed") &&
          !param_density->count("--seed") && !bound_cmd->count("--seed")) {
        rep_seed = cfg.seeds.front();
      }
      std::printf("cell: width=%d seed=%llu\n", width,
                  static_cast<unsigned long long>(rep_seed));
    }

    if (dataset->parsed()) {
      echo(widthlab::write_dataset_csv(cfg));
    } else if (converge->parsed()) {
      auto result = widthlab::run_convergence(cfg);
      echo(result.files);
    } else if (prior_check->parsed()) {
      echo(widthlab::run_prior_check(cfg));
    } else if (posterior->parsed()) {
      echo(widthlab::run_posterior(cfg, width, rep_seed));
    } else if (param_density->parsed()) {
      echo(widthlab::run_param_density(cfg, width, rep_seed));
    } else if (bound_cmd->parsed()) {
      echo(widthlab::run_bound_check(cfg, width, rep_seed));
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "widthlab: error: %s\n", e.what());
    return 1;
  }
}
