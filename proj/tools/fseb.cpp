#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fseb/cli/commands.hpp"

namespace {

using fseb::cli::Options;

void add_io(CLI::App* sub, Options& o, bool input_required = true) {
  auto* in = sub->add_option("--input", o.input, "input CSV (or config for simulate)");
  if (input_required)
    in->required();
  sub->add_option("--output", o.output, "output CSV; stdout when omitted");
}

void add_alpha(CLI::App* sub, Options& o) {
  sub->add_option("--alpha", o.alphas, "error level, repeatable (default 0.05)")
      ->take_all()
      ->allow_extra_args(false);
}

} // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Finite-sample empirical-Bayes confidence sets and e-value tests"};
  app.set_version_flag("--version", fseb::cli::version);
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "run the simulation scenarios of a config file");
  add_io(simulate, o);
  simulate->add_option("--seed", o.seed, "override every scenario's base seed");
  simulate->add_option("--reps", o.reps, "override every scenario's replication count");
  simulate->add_option("--threads", o.threads, "worker threads (default FSEB_THREADS or all cores)");

  auto* ci = app.add_subcommand("ci", "per-unit confidence intervals");
  add_io(ci, o);
  ci->add_option("--model", o.model, "nn, pg or bb")->required();
  add_alpha(ci, o);
  ci->add_option("--adjust", o.adjust, "none, bonferroni or fcr:<threshold>");

  auto* test = app.add_subcommand("test", "per-site tests of equal proportions on paired series");
  add_io(test, o);
  test->add_option("--model", o.model, "bb (the only paired model)");
  add_alpha(test, o);
  test->add_option("--adjust", o.adjust, "none, bonferroni or bh");
  test->add_flag("--comparators", o.comparators, "add Fisher exact and score-test columns");
  test->add_option("--window", o.window, "moving-average window (default 10)");
  test->add_option("--min-m", o.min_m, "drop sites whose smaller trial count is below this");
  test->add_option("--max-m", o.max_m, "drop sites whose larger trial count is above this");

  auto* adjust = app.add_subcommand("adjust", "adjust a p_value column for multiplicity");
  add_io(adjust, o);
  add_alpha(adjust, o);
  adjust->add_option("--adjust", o.adjust, "bh or bonferroni")->required();

  auto* validate = app.add_subcommand("validate", "empirical coverage or size of a named scenario");
  validate->add_option("--model", o.model, "nn, pg or bb")->required();
  validate->add_option("--scenario", o.scenario, "scenario shorthand")->required();
  validate->add_option("--output", o.output, "output CSV; stdout when omitted");
  add_alpha(validate, o);
  validate->add_option("--seed", o.seed, "base seed (default 1)");
  validate->add_option("--reps", o.reps, "replications, at least 100 (default 1000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fseb::cli::exit_usage;
  }

  return fseb::cli::guarded(
      [&] {
        if (*simulate)
          return fseb::cli::cmd_simulate(o, std::cerr);
        if (*ci)
          return fseb::cli::cmd_ci(o, std::cerr);
        if (*test)
          return fseb::cli::cmd_test(o, std::cerr);
        if (*adjust)
          return fseb::cli::cmd_adjust(o, std::cerr);
        return fseb::cli::cmd_validate(o, std::cerr);
      },
      std::cerr);
}
