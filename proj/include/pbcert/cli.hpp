#pragma once

// Orchestration behind the pbcert command-line tool: input parsing, the five
// commands, JSON reports and on-disk artifacts.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbcert/goodwin.hpp"

namespace pbcert::cli {

inline constexpr const char* kVersion = "0.3.0";

enum class Command { CertifyDelay, GoodwinCheck, GoodwinRegion, Simulate, ParabolicGap };

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& name);

enum ExitCode : int { kCertified = 0, kInvalid = 1, kInconclusive = 2, kRefuted = 3 };

struct RunConfig {
  Command command = Command::GoodwinCheck;
  std::string input;
  std::string out_dir = ".";
  goodwin::AxisRange tau_range{0.05, 3.0, 120};
  goodwin::AxisRange lambda_range{0.05, 1.5, 120};
  std::optional<std::vector<double>> rho_set;
  std::optional<std::vector<double>> beta_set;
  int workers = 1;
  double margin = 1e-6;
  /// Simulation horizon; unset means 500 delays.
  std::optional<double> horizon;
  double step = 0.01;
  std::uint64_t seed = 0;

  /// Throws InputError on violated invariants.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Validation failure tied to a field of the input document or configuration.
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what) : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// "a:b:n" with n >= 1.
goodwin::AxisRange parse_range(const std::string& text, const std::string& field);
/// "v1,v2,..." of finite reals.
std::vector<double> parse_list(const std::string& text, const std::string& field);

struct RunResult {
  int exit_code = kCertified;
  nlohmann::json report;
};

/// Runs one command and writes report.json (plus region.csv / region.svg or
/// trajectory.csv) into config.out_dir. Validation failures give exit 1 and a
/// report of the form {"error": {"code", "field", "message"}}.
RunResult run(const RunConfig& config);

}  // namespace pbcert::cli
