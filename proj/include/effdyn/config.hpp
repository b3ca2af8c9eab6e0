#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effdyn/experiments.hpp"
#include "effdyn/meanfield.hpp"
#include "effdyn/potentials.hpp"

namespace effdyn {

enum class Command { scattering, hartree, gp, nbody, marginals, converge, correlate, dispersion };

std::string_view to_string(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name);
const std::vector<Command>& all_commands();

/// Resolved run configuration: every key the command accepts, with its value
/// in canonical text form (numbers in shortest round-trip decimal). Two
/// configs are equal when they describe the same run.
struct RunConfig {
  Command command = Command::scattering;
  std::map<std::string, std::string> values;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;

  PotentialSpec potential() const;
  UniformGrid grid() const;
  ComplexField initial_state() const;
  EvolutionConfig evolution() const;
  RelativeSetup relative_setup() const;
};

/// Parses `key = value` lines for `command`. `[section]` headers prefix the
/// following keys with "section."; `#` starts a comment. Unknown, duplicate,
/// missing or malformed keys raise a parse error naming the line and key.
/// Keys left out take their documented defaults.
RunConfig parse_config(std::string_view text, Command command);

/// One `key = value` line per key, sorted, with a leading comment naming the
/// command. parse_config(serialize(c), c.command) == c.
std::string serialize(const RunConfig& cfg);

/// Human-readable key list with defaults, for --help output.
std::string describe_keys(Command command);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace effdyn
