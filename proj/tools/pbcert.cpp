// pbcert command-line front end.
//
//   pbcert goodwin-check --input point.json --out results/
//   pbcert goodwin-region --tau-range 0.05:3:120 --lambda-range 0.05:1.5:120 --workers 8
//
// Exit status: 0 certified, 1 invalid input, 2 inconclusive, 3 refuted.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pbcert/cli.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("pbcert");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PBCERT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

int invalid(const std::string& field, const std::string& message) {
  nlohmann::json err = {{"error", {{"code", "InvalidInput"}, {"field", field}, {"message", message}}}};
  std::cout << err.dump() << '\n';
  return pbcert::cli::kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  using namespace pbcert::cli;

  CLI::App app{"Frequency-domain certification of delay systems"};
  app.set_version_flag("--version", std::string(kVersion));

  std::string command, tau_range, lambda_range, rho_set, beta_set;
  RunConfig cfg;
  double horizon = 0.0;
  app.add_option("command", command, "certify-delay | goodwin-check | goodwin-region | simulate | parabolic-gap")
      ->required();
  app.add_option("--input", cfg.input, "input JSON document");
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--tau-range", tau_range, "a:b:n");
  app.add_option("--lambda-range", lambda_range, "a:b:n");
  app.add_option("--rho-set", rho_set, "v1,v2,...");
  app.add_option("--beta-set", beta_set, "v1,v2,...");
  app.add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
  app.add_option("--margin", cfg.margin, "safety margin of the frequency sweeps")->capture_default_str();
  app.add_option("--horizon", horizon, "simulation horizon (default 500 delays)");
  app.add_option("--step", cfg.step, "integration step")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed echoed into the report")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return invalid("arguments", e.what());
  }

  try {
    const auto cmd = parse_command(command);
    if (!cmd) return invalid("command", "unknown command " + command);
    cfg.command = *cmd;
    if (!tau_range.empty()) cfg.tau_range = parse_range(tau_range, "tau-range");
    if (!lambda_range.empty()) cfg.lambda_range = parse_range(lambda_range, "lambda-range");
    if (!rho_set.empty()) cfg.rho_set = parse_list(rho_set, "rho-set");
    if (!beta_set.empty()) cfg.beta_set = parse_list(beta_set, "beta-set");
    if (app.count("--horizon")) cfg.horizon = horizon;
  } catch (const InputError& e) {
    return invalid(e.field(), e.what());
  }

  const RunResult res = run(cfg);
  if (res.exit_code == kInvalid)
    std::cout << nlohmann::json{{"error", res.report["error"]}}.dump() << '\n';
  else
    std::cout << res.report["status"].get<std::string>() << ": " << cfg.out_dir << "/report.json\n";
  return res.exit_code;
}
