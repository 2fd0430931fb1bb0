#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "monocat/common.hpp"

namespace monocat::cli {

enum ExitCode : int { kOk = 0, kInvalidConfig = 1, kNumericFailure = 2 };

/// A config problem; the message names the offending key.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::string> mode;  // overrides the config's "mode"
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
};

/// Loads the config, dispatches on mode and writes the artifacts into `out`.
/// Messages go to `log`, errors to `err`. Returns an ExitCode.
int run(const RunOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace monocat::cli
