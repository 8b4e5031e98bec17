#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pukf/errors.hpp"
#include "pukf/harness/csv.hpp"
#include "pukf/harness/flops.hpp"
#include "pukf/harness/monte_carlo.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitFilterFailure = 3;

struct CommonArgs {
  std::string scenario = "falling-body";
  std::string filter = "pu";
  std::string weights;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--scenario", args->scenario, "falling-body|imu-cam|tumbler");
  cmd->add_option("--filter", args->filter, "ekf|schmidt|pu|sr-pu|ud-pu|mekf-pu");
  cmd->add_option("--weights", args->weights,
                  "comma list, 'dnl', 'dc', or 'dnl:base=<list>'");
  cmd->add_option("--seed", args->seed, "base RNG seed");
  cmd->add_option("--out", args->out, "output path (default stdout)");
  cmd->add_option("--config", args->config, "key = value config file");
}

pukf::ScenarioConfig make_config(const CommonArgs& args) {
  pukf::ScenarioConfig cfg = pukf::default_config(args.scenario);
  if (!args.config.empty()) pukf::load_config_file(cfg, args.config);
  cfg.scenario = args.scenario;
  return cfg;
}

template <typename Fn>
int with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file '" << path << "'\n";
    return kExitConfigError;
  }
  fn(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial-update Schmidt-Kalman filter toolkit"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "single seeded run, CSV log");
  add_common(run_cmd, &run_args);

  CommonArgs mc_args;
  int mc_runs = 100;
  int mc_jobs = 1;
  CLI::App* mc_cmd = app.add_subcommand("monte-carlo", "seeded campaign, CSV aggregates");
  add_common(mc_cmd, &mc_args);
  mc_cmd->add_option("--runs", mc_runs, "number of runs");
  mc_cmd->add_option("--jobs", mc_jobs, "worker threads");

  CommonArgs cmp_args;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "covariance-form equivalence report");
  add_common(cmp_cmd, &cmp_args);

  int flops_n = 10, flops_m = 1, flops_q = 1;
  std::string flops_out;
  CLI::App* flops_cmd = app.add_subcommand("flops", "closed-form operation-count tables");
  flops_cmd->add_option("-n", flops_n, "state dimension");
  flops_cmd->add_option("-m", flops_m, "measurement dimension");
  flops_cmd->add_option("-q", flops_q, "process noise dimension");
  flops_cmd->add_option("--out", flops_out, "output path (default stdout)");

  CommonArgs export_args;
  CLI::App* export_cmd = app.add_subcommand("export-config", "write the reference config");
  add_common(export_cmd, &export_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (run_cmd->parsed()) {
      const pukf::ScenarioConfig cfg = make_config(run_args);
      const pukf::FilterVariant variant = pukf::parse_filter_variant(run_args.filter);
      const pukf::WeightSpec weights = pukf::parse_weight_spec(run_args.weights);
      const pukf::RunRecord rec = pukf::run_scenario(cfg, variant, weights, run_args.seed);
      return with_output(run_args.out, [&](std::ostream& out) { pukf::write_run_csv(out, rec); });
    }
    if (mc_cmd->parsed()) {
      const pukf::ScenarioConfig cfg = make_config(mc_args);
      const pukf::FilterVariant variant = pukf::parse_filter_variant(mc_args.filter);
      const pukf::WeightSpec weights = pukf::parse_weight_spec(mc_args.weights);
      const pukf::MonteCarloReport report =
          pukf::monte_carlo(cfg, variant, weights, mc_runs, mc_args.seed, mc_jobs);
      const int rc = with_output(mc_args.out, [&](std::ostream& out) {
        pukf::write_monte_carlo_csv(out, report);
      });
      std::cerr << "runs=" << report.run_count
                << " divergences=" << report.divergence_count << "\n";
      return rc;
    }
    if (cmp_cmd->parsed()) {
      const pukf::ScenarioConfig cfg = make_config(cmp_args);
      const pukf::WeightSpec weights = pukf::parse_weight_spec(cmp_args.weights);
      const pukf::FormComparison c = pukf::compare_forms(cfg, weights, cmp_args.seed);
      return with_output(cmp_args.out, [&](std::ostream& out) {
        out << "max_state_deviation," << pukf::format_csv_double(c.max_state_dev) << "\r\n";
        out << "max_covariance_deviation," << pukf::format_csv_double(c.max_cov_dev) << "\r\n";
        if (c.ekf_included) {
          out << "max_state_deviation_vs_ekf,"
              << pukf::format_csv_double(c.max_state_dev_vs_ekf) << "\r\n";
          out << "max_covariance_deviation_vs_ekf,"
              << pukf::format_csv_double(c.max_cov_dev_vs_ekf) << "\r\n";
        }
      });
    }
    if (flops_cmd->parsed()) {
      const auto rows = pukf::flops_report(flops_n, flops_m, flops_q);
      return with_output(flops_out, [&](std::ostream& out) {
        out << "table,label,muldiv,sqrt\r\n";
        for (const auto& row : rows) {
          out << row.table << ',' << row.label << ','
              << pukf::format_csv_double(row.flops.muldiv) << ','
              << pukf::format_csv_double(row.flops.sqrts) << "\r\n";
        }
      });
    }
    if (export_cmd->parsed()) {
      const std::string text = pukf::reference_config_text(export_args.scenario);
      return with_output(export_args.out, [&](std::ostream& out) { out << text; });
    }
  } catch (const pukf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const pukf::FilterError& e) {
    std::cerr << "filter failure: " << e.what() << "\n";
    return kExitFilterFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFilterFailure;
  }
  return 0;
}
