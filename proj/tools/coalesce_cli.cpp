// coalesce: exact tables, Monte Carlo simulation, and exact-vs-empirical
// comparison reports for Lambda-coalescents and their fixation line.
//
// Exit status: 0 = success / verdict pass, 1 = verdict fail, 2 = usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coalesce/harness.hpp"

namespace {

using coalesce::ComparisonReport;
using coalesce::LambdaMeasure;
using coalesce::Table;

struct MeasureArgs {
  std::optional<double> alpha;
  std::string measure_file;

  LambdaMeasure resolve() const {
    if (alpha && !measure_file.empty()) {
      throw CLI::ValidationError(
          "--alpha and --measure-file are mutually exclusive");
    }
    if (!measure_file.empty()) return coalesce::load_measure_file(measure_file);
    if (alpha) return LambdaMeasure::beta(*alpha);
    throw CLI::ValidationError("one of --alpha or --measure-file is required");
  }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("COALESCE_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 42;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
}

std::string table_text(const Table& t, const std::string& format) {
  if (format == "json") return coalesce::table_to_json(t).dump(2) + "\n";
  std::ostringstream os;
  coalesce::write_table_csv(t, os);
  return os.str();
}

std::string report_text(const ComparisonReport& r, const std::string& format) {
  if (format == "json") {
    nlohmann::json j = r;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  coalesce::write_report_csv(r, os);
  return os.str();
}

void emit_plot_data(const ComparisonReport& r, std::ostream& os) {
  os << "x,exact,empirical,band_low,band_high\n";
  for (const auto& row : r.rows) {
    os << coalesce::format_double(row.index) << ','
       << coalesce::format_double(row.exact) << ','
       << coalesce::format_double(row.empirical) << ','
       << coalesce::format_double(row.exact - 2.0 * row.std_error) << ','
       << coalesce::format_double(row.exact + 2.0 * row.std_error) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lambda-coalescent exact laws and Monte Carlo verification"};
  app.require_subcommand(1);

  std::string format = "csv";
  std::string out_path;

  MeasureArgs measure;
  coalesce::ExactOptions exact_opt;
  coalesce::SimulateOptions sim_opt;
  coalesce::CompareOptions cmp_opt;
  std::string quantity, model;
  std::string samples_out;
  bool plot_data = false;

  auto add_common_flags = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", measure.alpha,
                    "Beta(2-alpha,alpha) driving measure, alpha in (0,2)");
    cmd->add_option("--measure-file", measure.measure_file,
                    "generic driving measure description file");
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", out_path,
                    "write output to a file instead of stdout");
  };

  // ---- exact ----
  auto* exact = app.add_subcommand("exact", "evaluate exact quantities");
  add_common_flags(exact);
  exact
      ->add_option("--quantity", quantity,
                   "one of: rates, renewal, records, record-gf, depth, "
                   "last-coalescence, last-coalescence-limit, hitting, "
                   "hitting-limit, hitting-asymptote, reversed")
      ->required();
  exact->add_option("--n", exact_opt.n, "chain start state / table size");
  exact->add_option("--jmax", exact_opt.j_max, "largest j in the table");
  exact->add_option("--imax", exact_opt.i_max, "largest i in the table");
  exact->add_option("--kmax", exact_opt.k_max, "largest k in the table");
  exact->add_option("--i", exact_opt.i, "reversed-chain source state");
  exact->add_option("--spoints", exact_opt.s_points,
                    "number of s grid points for generating functions");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "run Monte Carlo campaigns");
  add_common_flags(sim);
  sim->add_option("--model", model,
                  "one of: block-counting, partition, fixation-line, "
                  "lookdown, bs-branching, bs-depth")
      ->required();
  sim->add_option("--n", sim_opt.cfg.n, "start state / number of levels");
  sim->add_option("--levels", sim_opt.cfg.n, "alias for --n");
  sim->add_option("--replicas", sim_opt.cfg.replicas, "number of replicas");
  sim->add_option("--seed", sim_opt.cfg.seed, "random seed");
  sim->add_option("--threads", sim_opt.cfg.threads,
                  "worker threads (0 = hardware)");
  sim->add_option("--horizon", sim_opt.cfg.horizon, "lookdown time horizon");
  sim->add_option("--cap", sim_opt.cfg.level_cap,
                  "fixation line level cap (default: --n)");
  sim->add_option("--population-cap", sim_opt.cfg.population_cap,
                  "branching population truncation cap");
  sim->add_option("--start", sim_opt.start, "fixation line start level");
  sim->add_option("--t", sim_opt.t, "branching time");
  sim->add_flag("--exact-law", sim_opt.exact_law,
                "bs-branching: draw the time-t population from its exact law");
  sim->add_option("--samples-out", samples_out,
                  "write per-replica samples to a file");

  // ---- compare ----
  auto* cmp = app.add_subcommand(
      "compare", "pair exact values with simulation and emit a report");
  add_common_flags(cmp);
  cmp->add_option("--quantity", quantity,
                  "one of: records, renewal, hitting, last-coalescence, "
                  "tau-vs-alpha, depth, bs-growth, bs-depth")
      ->required();
  cmp->add_option("--n", cmp_opt.cfg.n, "start state / number of levels");
  cmp->add_option("--levels", cmp_opt.cfg.n, "alias for --n");
  cmp->add_option("--replicas", cmp_opt.cfg.replicas, "number of replicas");
  cmp->add_option("--seed", cmp_opt.cfg.seed, "random seed");
  cmp->add_option("--threads", cmp_opt.cfg.threads,
                  "worker threads (0 = hardware)");
  cmp->add_option("--j", cmp_opt.j, "tau-vs-alpha start level");
  cmp->add_option("--kmax", cmp_opt.k_max, "renewal comparison depth");
  cmp->add_option("--t", cmp_opt.t, "branching growth time");
  cmp->add_option("--z-threshold", cmp_opt.z_threshold,
                  "per-row |z| verdict threshold");
  cmp->add_option("--p-threshold", cmp_opt.p_threshold,
                  "family-test p-value verdict threshold");
  cmp->add_flag("--chain-sampler", cmp_opt.branching_chain_sampler,
                "bs-growth: simulate the chain jump-by-jump (slow, may "
                "truncate at the population cap)");
  cmp->add_flag("--plot-data", plot_data,
                "emit (x, exact, empirical, band) columns instead of a report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(exact)) {
      exact_opt.measure = measure.resolve();
      const Table t = coalesce::run_exact(quantity, exact_opt);
      write_output(table_text(t, format), out_path);
      return 0;
    }
    if (app.got_subcommand(sim)) {
      sim_opt.cfg.measure = measure.resolve();
      if (!sim->count("--seed")) sim_opt.cfg.seed = default_seed();
      const auto res = coalesce::run_simulate(model, sim_opt);
      write_output(table_text(res.table, format), out_path);
      if (!samples_out.empty()) {
        std::ofstream s(samples_out);
        if (!s) throw std::runtime_error("cannot open " + samples_out);
        s << res.samples_name << '\n';
        for (double v : res.samples) s << coalesce::format_double(v) << '\n';
      }
      return 0;
    }
    if (app.got_subcommand(cmp)) {
      cmp_opt.cfg.measure = measure.resolve();
      if (!cmp->count("--seed")) cmp_opt.cfg.seed = default_seed();
      const ComparisonReport rep = coalesce::run_compare(quantity, cmp_opt);
      if (plot_data) {
        std::ostringstream os;
        emit_plot_data(rep, os);
        write_output(os.str(), out_path);
      } else {
        write_output(report_text(rep, format), out_path);
      }
      return rep.pass ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
