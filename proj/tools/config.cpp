#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace shgq_cli {

namespace {

using T = ValueType;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& out) {
  if (s == "inf" || s == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

template <class I>
bool parse_int(const std::string& s, I& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

const char* type_name(ValueType t) {
  switch (t) {
    case T::Real: return "a number";
    case T::Integer: return "an integer";
    case T::Unsigned: return "a non-negative integer";
    case T::Boolean: return "true or false";
    case T::Text: return "text";
    case T::RealList: return "a comma-separated list of numbers";
    case T::Choice: return "one of the listed choices";
  }
  return "?";
}

std::string check_value(const KeySpec& k, const std::string& raw) {
  const std::string v = trim(raw);
  auto bad = [&] {
    std::string msg = k.name() + ": expected " + type_name(k.type) + ", got '" + v + "'";
    if (k.type == T::Choice) {
      msg += " (choices:";
      for (const auto& c : k.choices) msg += " " + c;
      msg += ")";
    }
    return ConfigError(msg);
  };
  switch (k.type) {
    case T::Real: {
      double d;
      if (!parse_real(v, d)) throw bad();
      return v;
    }
    case T::Integer: {
      long i;
      if (!parse_int(v, i)) throw bad();
      return v;
    }
    case T::Unsigned: {
      std::uint64_t u;
      if (!parse_int(v, u)) throw bad();
      return v;
    }
    case T::Boolean: {
      if (v == "true" || v == "yes" || v == "1") return "true";
      if (v == "false" || v == "no" || v == "0") return "false";
      throw bad();
    }
    case T::Text:
      if (v.empty()) throw bad();
      return v;
    case T::RealList: {
      std::string canon;
      for (const auto& item : split_list(v)) {
        double d;
        if (!parse_real(item, d)) throw bad();
        canon += (canon.empty() ? "" : ", ") + item;
      }
      if (canon.empty()) throw bad();
      return canon;
    }
    case T::Choice:
      if (std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) throw bad();
      return v;
  }
  return v;
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = {
      {"model", "delta1", T::Real, "2.0", "FH detuning", {}},
      {"model", "delta2", T::Real, "-2.0", "SH detuning", {}},
      {"model", "gamma", T::Real, "0.5", "SH/FH loss ratio", {}},
      {"model", "E", T::Real, "", "pump amplitude", {}},
      {"model", "E_ratio", T::Real, "", "pump relative to the stationary threshold", {}},
      {"model", "n_th", T::Real, "1e8", "noise scale, inf disables noise", {}},

      {"physical", "gamma1", T::Real, "", "FH loss rate [1/s]", {}},
      {"physical", "gamma2", T::Real, "", "SH loss rate [1/s]", {}},
      {"physical", "delta1", T::Real, "", "FH detuning [rad/s]", {}},
      {"physical", "delta2", T::Real, "", "SH detuning [rad/s]", {}},
      {"physical", "g", T::Real, "", "nonlinear coupling", {}},
      {"physical", "omega1", T::Real, "", "FH angular frequency [rad/s]", {}},
      {"physical", "c", T::Real, "299792458", "speed of light [m/s]", {}},
      {"physical", "E_in", T::Real, "", "injected pump amplitude", {}},

      {"threshold", "k_min", T::Real, "0", "", {}},
      {"threshold", "k_max", T::Real, "4", "", {}},
      {"threshold", "k_points", T::Integer, "512", "", {}},
      {"threshold", "k_tol", T::Real, "1e-6", "", {}},
      {"threshold", "E_min", T::Real, "0", "", {}},
      {"threshold", "E_max", T::Real, "30", "", {}},
      {"threshold", "E_scan_points", T::Integer, "64", "", {}},
      {"threshold", "E_tol", T::Real, "1e-7", "", {}},

      {"scan", "delta2_min", T::Real, "-6", "", {}},
      {"scan", "delta2_max", T::Real, "8", "", {}},
      {"scan", "points", T::Integer, "141", "", {}},

      {"spectrum", "k_max", T::Real, "", "default 2.5 k_c", {}},
      {"spectrum", "points", T::Integer, "1024", "", {}},

      {"grid", "N", T::Integer, "256", "transverse grid points", {}},
      {"grid", "L", T::Real, "103.057", "transverse box length", {}},

      {"run", "dt", T::Real, "1e-3", "", {}},
      {"run", "t_transient", T::Real, "200", "", {}},
      {"run", "t_total", T::Real, "2e4", "averaging time, split over trajectories", {}},
      {"run", "sample_stride", T::Integer, "50", "steps between samples", {}},
      {"run", "seed", T::Unsigned, "1", "", {}},
      {"run", "trajectories", T::Integer, "4", "", {}},
      {"run", "batches", T::Integer, "16", "batches per trajectory", {}},
      {"run", "perturbation", T::Real, "0", "initial random kick amplitude", {}},
      {"run", "full_pairs", T::Boolean, "false", "track every intensity pair", {}},
      {"run", "snapshots", T::Choice, "none", "far-field snapshot file", {"none", "binary", "csv"}},

      {"analyze", "input", T::Text, "", "snapshot file", {}},
      {"analyze", "batches", T::Integer, "16", "batches per trajectory", {}},

      {"figure", "pump_ratios", T::RealList, "", "pump levels for pump sweeps", {}},
      {"figure", "stochastic", T::Boolean, "true", "include Monte-Carlo points", {}},
  };
  return s;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                        std::tolower(static_cast<unsigned char>(b[j - 1]));
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (same ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(const std::string& name) {
  const auto dot = name.find('.');
  const std::string key = dot == std::string::npos ? name : name.substr(dot + 1);
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& k : schema()) {
    // Prefer keys in the same section on ties.
    std::size_t d = 2 * edit_distance(key, k.key);
    if (dot != std::string::npos && name.substr(0, dot) != k.section) d += 1;
    if (d < best_d) {
      best_d = d;
      best = k.name();
    }
  }
  return best;
}

const KeySpec& Config::spec(const std::string& name) const {
  for (const auto& k : schema())
    if (k.name() == name) return k;
  throw ConfigError("unknown key '" + name + "'");
}

bool Config::has(const std::string& name) const {
  const auto it = values_.find(name);
  return it != values_.end() && !it->second.empty();
}

bool Config::explicitly_set(const std::string& name) const {
  const auto it = explicit_.find(name);
  return it != explicit_.end() && it->second;
}

bool Config::section_used(const std::string& section) const {
  for (const auto& [name, set] : explicit_)
    if (set && name.rfind(section + ".", 0) == 0) return true;
  return false;
}

void Config::set(const std::string& name, const std::string& value) {
  values_[name] = check_value(spec(name), value);
  explicit_[name] = true;
}

void Config::preset(const std::string& name, const std::string& value) {
  const KeySpec& k = spec(name);
  if (explicitly_set(name)) return;
  values_[name] = value.empty() ? value : check_value(k, value);
  preset_[name] = true;
}

namespace {

const std::string& require_value(const std::map<std::string, std::string>& v, const std::string& name) {
  const auto it = v.find(name);
  if (it == v.end() || it->second.empty()) throw ConfigError("missing required key '" + name + "'");
  return it->second;
}

}  // namespace

double Config::real(const std::string& name) const {
  spec(name);
  double d;
  parse_real(require_value(values_, name), d);
  return d;
}

long Config::integer(const std::string& name) const {
  spec(name);
  long i = 0;
  parse_int(require_value(values_, name), i);
  return i;
}

std::uint64_t Config::unsigned_value(const std::string& name) const {
  spec(name);
  std::uint64_t u = 0;
  parse_int(require_value(values_, name), u);
  return u;
}

bool Config::boolean(const std::string& name) const { return require_value(values_, name) == "true"; }

std::string Config::text(const std::string& name) const {
  spec(name);
  return require_value(values_, name);
}

std::vector<double> Config::reals(const std::string& name) const {
  spec(name);
  std::vector<double> out;
  for (const auto& item : split_list(require_value(values_, name))) {
    double d;
    parse_real(item, d);
    out.push_back(d);
  }
  return out;
}

std::string Config::echo() const {
  std::ostringstream out;
  std::string section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      if (!section.empty()) out << "\n";
      section = k.section;
      out << "[" << section << "]\n";
    }
    const auto it = values_.find(k.name());
    const bool set = it != values_.end() && !it->second.empty();
    if (set) {
      out << k.key << " = " << it->second;
    } else {
      out << "# " << k.key << " =";
    }
    if (!explicitly_set(k.name()) || !k.help.empty()) {
      out << "  #";
      if (!explicitly_set(k.name())) {
        const auto p = preset_.find(k.name());
        out << (p != preset_.end() && p->second ? " preset" : set ? " default" : " unset");
      }
      if (!k.help.empty()) out << (explicitly_set(k.name()) ? " " : ", ") << k.help;
    }
    out << "\n";
  }
  return out.str();
}

Config default_config() { return parse_config(""); }

Config parse_config(const std::string& text) {
  Config c;
  for (const auto& k : schema()) {
    c.values_[k.name()] = k.default_value;
    c.explicit_[k.name()] = false;
  }
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::string comment;
    if (hash != std::string::npos) {
      comment = trim(line.substr(hash + 1));
      line.resize(hash);
    }
    line = trim(line);
    // Echoed defaults and presets read back as such, so an echo round-trips.
    const bool echoed = comment.rfind("default", 0) == 0 || comment.rfind("preset", 0) == 0;
    if (line.empty()) continue;
    auto where = [&] { return "line " + std::to_string(lineno) + ": "; };
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& k : schema()) known = known || k.section == section;
      if (!known) {
        std::string best;
        std::size_t d = std::numeric_limits<std::size_t>::max();
        for (const auto& k : schema()) {
          if (edit_distance(section, k.section) < d) {
            d = edit_distance(section, k.section);
            best = k.section;
          }
        }
        throw ConfigError(where() + "unknown section [" + section + "]; did you mean [" + best + "]?");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where() + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string name = section + "." + key;
    if (!c.values_.count(name)) {
      throw ConfigError(where() + "unknown key '" + name + "'; nearest valid key is '" + nearest_key(name) + "'");
    }
    if (!seen.insert(name).second) throw ConfigError(where() + "duplicate key '" + name + "'");
    try {
      c.set(name, line.substr(eq + 1));
      if (echoed) {
        c.explicit_[name] = false;
        c.preset_[name] = comment.rfind("preset", 0) == 0;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
  return c;
}

}  // namespace shgq_cli
