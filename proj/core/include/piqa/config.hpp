#pragma once

#include <map>
#include <string>

namespace piqa {

// Flat key = value configuration file. '#' starts a comment, keys are
// dotted lowercase (e.g. forge.defect_count_max). Flags override config.
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace piqa
