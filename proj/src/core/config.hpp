#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace combraman::config {

// INI-style configuration: `[section]` headers, `key = value` lines, `#`
// comments. Some sections ([manifold], [link], [budget.entry]) may repeat;
// all others must be unique. Every section name and key is validated
// against a fixed schema before any computation -- unknown keys are hard
// errors, not warnings.
struct Section {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& dflt) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double dflt) const;
  long long integer(const std::string& key) const;
  bool flag_or(const std::string& key, bool dflt) const;
};

class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& origin);

  // Unique section; throws if repeated, nullptr if absent.
  const Section* find(const std::string& name) const;
  const Section& require(const std::string& name) const;
  std::vector<const Section*> all(const std::string& name) const;

  // FNV-1a over the canonicalized content (section/key/value stream).
  std::uint64_t hash() const;

  const std::string& origin() const { return origin_; }

 private:
  std::vector<Section> sections_;
  std::string origin_;

  void validate_schema() const;
};

}  // namespace combraman::config
