#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace shgq_cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ValueType { Real, Integer, Unsigned, Boolean, Text, RealList, Choice };

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type;
  std::string default_value;  ///< empty: unset unless given
  std::string help;
  std::vector<std::string> choices;

  std::string name() const { return section + "." + key; }
};

const std::vector<KeySpec>& schema();

/// Validated configuration: every schema key has an entry, set or not.
class Config {
 public:
  bool has(const std::string& name) const;
  bool explicitly_set(const std::string& name) const;
  double real(const std::string& name) const;
  long integer(const std::string& name) const;
  std::uint64_t unsigned_value(const std::string& name) const;
  bool boolean(const std::string& name) const;
  std::string text(const std::string& name) const;
  std::vector<double> reals(const std::string& name) const;

  void set(const std::string& name, const std::string& value);
  /// Replaces the default of a key that was not set explicitly.
  void preset(const std::string& name, const std::string& value);
  bool section_used(const std::string& section) const;

  /// Canonical text with all keys; unset keys appear commented out.
  std::string echo() const;

 private:
  friend Config parse_config(const std::string& text);
  const KeySpec& spec(const std::string& name) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
  std::map<std::string, bool> preset_;
};

Config parse_config(const std::string& text);
Config default_config();

std::size_t edit_distance(const std::string& a, const std::string& b);
std::string nearest_key(const std::string& name);

}  // namespace shgq_cli
