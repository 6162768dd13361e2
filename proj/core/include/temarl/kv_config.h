#ifndef TEMARL_KV_CONFIG_H_
#define TEMARL_KV_CONFIG_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace temarl {

// Flat `key = value` text. Blank lines and `#` comments are ignored; later
// keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::istream& in);
  static KeyValueConfig Load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<long> get_int_list(const std::string& key, const std::vector<long>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<long> ParseIntList(const std::string& text);

}  // namespace temarl

#endif  // TEMARL_KV_CONFIG_H_
