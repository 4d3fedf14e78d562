// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rwfbm::cli {

enum class Format { csv, ndjson };

struct RunConfig {
  double hurst = 0.75;
  unsigned level = 8;
  double horizon = 1;
  std::uint64_t seed = 1;
  double epsilon = 1e-6;
  std::uint64_t replicas = 200;
  Format format = Format::csv;
  std::string out; ///< empty: standard output
  /// Past window cap in time units; unset picks the per-command default.
  std::optional<double> past_horizon;
  double delta = 0.01;
  double C = 3;
  unsigned threads = 0;
  bool inject_fault = false;
};

/// ConfigError naming the first offending field.
void validate(const RunConfig& config);

Format parse_format(const std::string& name);
const char* to_string(Format format);

/// "6..10" expands to 6,7,8,9,10; anything else is taken as a comma list.
std::vector<std::string> expand_values(const std::vector<std::string>& values);

/// One row per grid point: t, B_m(t), B_m^H(t). Returns the exit status.
int run_generate(const RunConfig& config, std::ostream& out);

/// Suites: identities, bounds, rates, distribution, delta, all. Exit status is 1
/// iff an exact identity failed.
int run_verify(const RunConfig& config, const std::string& suite, std::ostream& out);

/// One summary row per axis value (axis m or hurst, at least two values).
int run_sweep(const RunConfig& config, const std::string& axis, const std::vector<std::string>& values,
              std::ostream& out);

/// Parses argv and dispatches; errors go to stderr with exit status 2.
int main(int argc, char** argv);

} // namespace rwfbm::cli
