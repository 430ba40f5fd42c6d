#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "wiener/scenario.hpp"

namespace wiener::cli {

enum ExitCode : int { kPass = 0, kValidation = 1, kVerificationFailed = 2, kResourceCap = 3 };

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> order;
  std::optional<unsigned> modes;
  std::optional<unsigned> nmax;
  unsigned workers = 1;
};

/// Load the scenario and apply command line overrides.
ScenarioConfig load_config(const CommandOptions& options);

/// integrable / boundary / non-integrable / n/a for the scenario's closed-form moments.
std::string regime(const ScenarioConfig& config);

int run_solve(const CommandOptions& options, std::ostream& out, std::ostream& err);
int run_verify(const CommandOptions& options, std::ostream& out, std::ostream& err);
int run_kv(const CommandOptions& options, std::ostream& out, std::ostream& err);
int run_norms(const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace wiener::cli
