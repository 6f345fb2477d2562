#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "jhgp/sampler.hpp"
#include "jhgp/simulate.hpp"

namespace jhgp {

/// Flat `section.key = value` configuration. Unknown keys are rejected.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "config");
  static Config load(const std::filesystem::path& file);

  void set(const std::string& key, const std::string& value);
  /// "key=value" from the command line.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t seed() const;  // run.seed, mandatory

  const std::map<std::string, std::string>& values() const { return values_; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

SamplerConfig sampler_config(const Config& c);
/// sim.preset first, then individual sim.* keys on top.
SimConfig sim_config(const Config& c);
/// "26:30", "26,28,30" or a mix.
std::vector<Tick> parse_tick_list(const std::string& text);

}  // namespace jhgp
