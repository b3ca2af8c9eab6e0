#include "effdyn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "effdyn/error.hpp"
#include "effdyn/format.hpp"

namespace effdyn {

namespace {

enum class Kind { real, integer, choice, text, reals, integers };

struct KeyDef {
  std::string name;
  Kind kind;
  std::string fallback;  // empty and required: must be given
  std::vector<std::string> choices{};
  bool required = false;
  long long min_integer = 0;
};

struct CommandInfo {
  Command command;
  std::string_view name;
};

constexpr CommandInfo kCommands[] = {
    {Command::scattering, "scattering"}, {Command::hartree, "hartree"},     {Command::gp, "gp"},
    {Command::nbody, "nbody"},           {Command::marginals, "marginals"}, {Command::converge, "converge"},
    {Command::correlate, "correlate"},   {Command::dispersion, "dispersion"},
};

const std::vector<std::string> kPotentialKinds{"zero", "gaussian", "square_barrier", "soft_coulomb", "harmonic_trap"};

std::string num(double v) { return format_double(v); }

std::vector<KeyDef> potential_keys(const std::string& kind) {
  if (kind == "gaussian") return {{"potential.A", Kind::real, "1"}, {"potential.sigma", Kind::real, "1"}};
  if (kind == "square_barrier") return {{"potential.V0", Kind::real, "2"}, {"potential.R0", Kind::real, "1"}};
  if (kind == "soft_coulomb") return {{"potential.q", Kind::real, "1"}, {"potential.eps", Kind::real, "1"}};
  if (kind == "harmonic_trap") return {{"potential.kappa", Kind::real, "1"}};
  return {};
}

bool uses_potential(Command c) { return c != Command::gp; }

std::string default_kind(Command c) {
  switch (c) {
    case Command::scattering:
    case Command::correlate:
    case Command::dispersion: return "square_barrier";
    default: return "gaussian";
  }
}

void add_grid(std::vector<KeyDef>& keys, long long m) {
  keys.push_back({"grid.L", Kind::real, "16"});
  keys.push_back({"grid.M", Kind::integer, std::to_string(m), {}, false, 3});
}

void add_initial(std::vector<KeyDef>& keys) {
  keys.push_back({"initial.center", Kind::real, "0"});
  keys.push_back({"initial.width", Kind::real, "0.75"});
  keys.push_back({"initial.momentum", Kind::real, "0"});
}

void add_evolution(std::vector<KeyDef>& keys, double dt, long long steps, long long record_every) {
  keys.push_back({"evolution.dt", Kind::real, num(dt)});
  keys.push_back({"evolution.steps", Kind::integer, std::to_string(steps), {}, false, 1});
  keys.push_back({"evolution.record_every", Kind::integer, std::to_string(record_every)});
  keys.push_back({"evolution.norm_tolerance", Kind::real, "1e-06"});
  keys.push_back({"evolution.energy_tolerance", Kind::real, "inf"});
}

void add_snapshots(std::vector<KeyDef>& keys, const std::string& fallback) {
  keys.push_back({"output.snapshots", Kind::choice, fallback, {"none", "final", "all"}});
}

void add_radial(std::vector<KeyDef>& keys) {
  const RelativeSetup d;
  keys.push_back({"radial.radius", Kind::real, num(d.radius)});
  keys.push_back({"radial.spacing", Kind::real, num(d.spacing)});
  keys.push_back({"radial.plateau", Kind::real, num(d.plateau)});
  keys.push_back({"radial.ramp", Kind::real, num(d.ramp)});
  keys.push_back({"radial.absorb_fraction", Kind::real, num(d.absorb_fraction)});
  keys.push_back({"radial.absorb_strength", Kind::real, num(d.absorb_strength)});
  keys.push_back({"radial.dt", Kind::real, num(d.dt)});
  keys.push_back({"radial.reference_dt", Kind::real, num(d.reference_dt)});
  keys.push_back({"radial.window", Kind::real, num(d.window)});
  keys.push_back({"radial.scheme", Kind::choice, "crank_nicolson", {"crank_nicolson", "sine_split"}});
}

// Keys of `command` for the given potential kind, sorted by name.
std::vector<KeyDef> schema(Command command, const std::string& kind) {
  std::vector<KeyDef> keys{{"seed", Kind::integer, "1"}};
  if (uses_potential(command)) {
    keys.push_back({"potential.kind", Kind::choice, default_kind(command), kPotentialKinds});
    for (auto& k : potential_keys(kind)) keys.push_back(k);
  }
  switch (command) {
    case Command::scattering:
      keys.push_back({"radial.R", Kind::real, "20"});
      keys.push_back({"radial.M", Kind::integer, "10000", {}, false, 8});
      keys.push_back({"scattering.Ns", Kind::integers, "2,8,32,128"});
      break;
    case Command::hartree:
      add_grid(keys, 128);
      add_initial(keys);
      add_evolution(keys, 1e-3, 500, 10);
      add_snapshots(keys, "final");
      break;
    case Command::gp:
      add_grid(keys, 128);
      add_initial(keys);
      add_evolution(keys, 1e-3, 500, 10);
      add_snapshots(keys, "final");
      keys.push_back({"gp.a0", Kind::real, "0.05"});
      keys.push_back({"gp.mode", Kind::choice, "evolve", {"evolve", "ground_state"}});
      keys.push_back({"gp.trap_kappa", Kind::real, "0.5"});
      keys.push_back({"gp.tol", Kind::real, "1e-07"});
      break;
    case Command::nbody:
      add_grid(keys, 32);
      add_initial(keys);
      add_evolution(keys, 2.5e-3, 200, 20);
      add_snapshots(keys, "all");
      keys.push_back({"nbody.N", Kind::integer, "3", {}, false, 1});
      break;
    case Command::marginals:
      keys.push_back({"marginals.input", Kind::text, "", {}, true});
      keys.push_back({"marginals.k", Kind::integer, "1", {}, false, 1});
      keys.push_back({"marginals.hartree_dt", Kind::real, "0.0025"});
      break;
    case Command::converge:
      add_grid(keys, 32);
      add_initial(keys);
      add_evolution(keys, 2.5e-3, 200, 0);
      keys.push_back({"converge.Ns", Kind::integers, "2,3,4,5"});
      break;
    case Command::correlate:
      add_radial(keys);
      keys.push_back({"correlate.times", Kind::reals, "1,3,10,30,100"});
      break;
    case Command::dispersion:
      add_radial(keys);
      keys.push_back({"dispersion.times", Kind::reals, "1,2,5,10,20,50,100"});
      keys.push_back({"dispersion.fit_lo", Kind::real, "1"});
      keys.push_back({"dispersion.fit_hi", Kind::real, "100"});
      break;
  }
  std::sort(keys.begin(), keys.end(), [](const KeyDef& a, const KeyDef& b) { return a.name < b.name; });
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void parse_error(std::size_t line, const std::string& key, const std::string& what) {
  std::string msg = line ? "line " + std::to_string(line) + ": " : std::string{};
  if (!key.empty()) msg += "key '" + key + "': ";
  fail(ErrorCategory::parse, msg + what);
}

std::optional<double> to_real(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Canonical text of `raw` for `def`, or a parse error at `line`.
std::string canonical(const KeyDef& def, const std::string& raw, std::size_t line) {
  switch (def.kind) {
    case Kind::real: {
      const auto v = to_real(raw);
      if (!v) parse_error(line, def.name, "malformed number '" + raw + "'");
      return num(*v);
    }
    case Kind::integer: {
      const auto v = to_integer(raw);
      if (!v) parse_error(line, def.name, "malformed integer '" + raw + "'");
      if (*v < def.min_integer)
        parse_error(line, def.name, "must be at least " + std::to_string(def.min_integer));
      return std::to_string(*v);
    }
    case Kind::choice:
      if (std::find(def.choices.begin(), def.choices.end(), raw) == def.choices.end()) {
        std::string options;
        for (const auto& c : def.choices) options += (options.empty() ? "" : ", ") + c;
        parse_error(line, def.name, "'" + raw + "' is not one of " + options);
      }
      return raw;
    case Kind::text:
      if (raw.empty()) parse_error(line, def.name, "empty value");
      return raw;
    case Kind::reals:
    case Kind::integers: {
      std::string out;
      for (const auto& item : split_list(raw)) {
        std::string c;
        if (def.kind == Kind::reals) {
          const auto v = to_real(item);
          if (!v) parse_error(line, def.name, "malformed number '" + item + "' in list");
          c = num(*v);
        } else {
          const auto v = to_integer(item);
          if (!v) parse_error(line, def.name, "malformed integer '" + item + "' in list");
          c = std::to_string(*v);
        }
        out += (out.empty() ? "" : ",") + c;
      }
      return out;
    }
  }
  return raw;
}

struct Entry {
  std::size_t line;
  std::string value;
};

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  fail(ErrorCategory::domain, "config key '" + key + "': " + what);
}

}  // namespace

std::string_view to_string(Command c) noexcept {
  for (const auto& info : kCommands)
    if (info.command == c) return info.name;
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& info : kCommands)
    if (info.name == name) return info.command;
  return std::nullopt;
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> list = [] {
    std::vector<Command> out;
    for (const auto& info : kCommands) out.push_back(info.command);
    return out;
  }();
  return list;
}

RunConfig parse_config(std::string_view text, Command command) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(line_no, "", "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty() || section.find_first_of(" \t=") != std::string::npos)
        parse_error(line_no, "", "bad section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_error(line_no, "", "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) parse_error(line_no, "", "missing key before '='");
    if (!section.empty()) key = section + "." + key;
    if (entries.count(key)) parse_error(line_no, key, "duplicate (first set on line " + std::to_string(entries[key].line) + ")");
    entries[key] = {line_no, value};
  }

  std::string kind = default_kind(command);
  if (uses_potential(command)) {
    if (auto it = entries.find("potential.kind"); it != entries.end()) {
      if (std::find(kPotentialKinds.begin(), kPotentialKinds.end(), it->second.value) == kPotentialKinds.end())
        parse_error(it->second.line, "potential.kind", "unknown potential kind '" + it->second.value + "'");
      kind = it->second.value;
    }
  }
  const auto keys = schema(command, kind);

  RunConfig cfg;
  cfg.command = command;
  for (const auto& [key, entry] : entries) {
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeyDef& d) { return d.name == key; });
    if (it == keys.end()) {
      if (key.rfind("potential.", 0) == 0 && uses_potential(command))
        parse_error(entry.line, key, "unknown key for potential kind " + kind);
      parse_error(entry.line, key, "unknown key for " + std::string(to_string(command)));
    }
    cfg.values[key] = canonical(*it, entry.value, entry.line);
  }
  for (const auto& def : keys) {
    if (cfg.values.count(def.name)) continue;
    if (def.required) parse_error(0, def.name, "missing required key");
    cfg.values[def.name] = def.fallback;
  }
  return cfg;
}

std::string serialize(const RunConfig& cfg) {
  std::string out = "# effdyn " + std::string(to_string(cfg.command)) + "\n";
  for (const auto& [key, value] : cfg.values) out += key + " = " + value + "\n";
  return out;
}

std::string describe_keys(Command command) {
  std::string out;
  std::set<std::string> seen;
  auto emit = [&](const std::vector<KeyDef>& keys) {
    for (const auto& k : keys) {
      if (!seen.insert(k.name).second) continue;
      out += "  " + k.name + " = " + (k.required ? "<required>" : k.fallback);
      if (!k.choices.empty() && k.name != "potential.kind") {
        std::string options;
        for (const auto& c : k.choices) options += (options.empty() ? "" : "|") + c;
        out += "   (" + options + ")";
      }
      out += "\n";
    }
  };
  emit(schema(command, default_kind(command)));
  if (uses_potential(command)) {
    out += "  potential.kind is one of zero|gaussian|square_barrier|soft_coulomb|harmonic_trap with parameters\n";
    out += "    gaussian: A, sigma; square_barrier: V0, R0; soft_coulomb: q, eps; harmonic_trap: kappa\n";
  }
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const std::string& RunConfig::text(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) fail(ErrorCategory::structural, "config has no key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const auto v = to_real(text(key));
  if (!v) config_error(key, "not a number");
  return *v;
}

long long RunConfig::integer(const std::string& key) const {
  const auto v = to_integer(text(key));
  if (!v) config_error(key, "not an integer");
  return *v;
}

bool RunConfig::flag(const std::string& key) const { return text(key) == "true"; }

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(key))) {
    const auto v = to_real(item);
    if (!v) config_error(key, "not a list of numbers");
    out.push_back(*v);
  }
  return out;
}

std::vector<int> RunConfig::integers(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_list(text(key))) {
    const auto v = to_integer(item);
    if (!v) config_error(key, "not a list of integers");
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

PotentialSpec RunConfig::potential() const {
  const auto& kind = text("potential.kind");
  PotentialSpec v = ZeroPotential{};
  if (kind == "gaussian") v = GaussianPotential{real("potential.A"), real("potential.sigma")};
  if (kind == "square_barrier") v = SquareBarrier{real("potential.V0"), real("potential.R0")};
  if (kind == "soft_coulomb") v = SoftCoulomb{real("potential.q"), real("potential.eps")};
  if (kind == "harmonic_trap") v = HarmonicTrap{real("potential.kappa")};
  validate(v);
  return v;
}

UniformGrid RunConfig::grid() const { return UniformGrid(real("grid.L"), static_cast<std::size_t>(integer("grid.M"))); }

ComplexField RunConfig::initial_state() const {
  return gaussian_packet(grid(), real("initial.center"), real("initial.width"), real("initial.momentum"));
}

EvolutionConfig RunConfig::evolution() const {
  EvolutionConfig e;
  e.dt = real("evolution.dt");
  e.steps = static_cast<std::size_t>(integer("evolution.steps"));
  e.record_every = static_cast<std::size_t>(integer("evolution.record_every"));
  e.norm_tolerance = real("evolution.norm_tolerance");
  e.energy_tolerance = real("evolution.energy_tolerance");
  e.validate();
  return e;
}

RelativeSetup RunConfig::relative_setup() const {
  RelativeSetup s;
  s.radius = real("radial.radius");
  s.spacing = real("radial.spacing");
  s.plateau = real("radial.plateau");
  s.ramp = real("radial.ramp");
  s.absorb_fraction = real("radial.absorb_fraction");
  s.absorb_strength = real("radial.absorb_strength");
  s.dt = real("radial.dt");
  s.reference_dt = real("radial.reference_dt");
  s.window = real("radial.window");
  s.scheme = text("radial.scheme") == "sine_split" ? RadialScheme::sine_split : RadialScheme::crank_nicolson;
  s.validate();
  return s;
}

}  // namespace effdyn
