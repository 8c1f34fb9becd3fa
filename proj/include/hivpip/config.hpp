// config.hpp
//
// Flat key=value configuration with dotted keys (model.alpha,
// noise.sigma, optimizer.theta, ...). Lines starting with '#' and blank
// lines are ignored. CLI flags are applied on top as overrides.

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hivpip {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class KeyValues {
public:
  static KeyValues parse_file(const std::filesystem::path& path);
  static KeyValues parse_stream(std::istream& in, const std::string& origin);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // comma-separated list of doubles
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

private:
  std::map<std::string, std::string> kv_;
};

}  // namespace hivpip
