#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "alq/vehicle_plant.hpp"

namespace alq {

/// Flat "key = value" file; '#' or ';' start comment lines.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::string& path);
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_double(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;
  const std::string& origin() const { return origin_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Keys accepted in a vehicle parameter file.
const std::set<std::string>& vehicle_keys();

/// Apply vehicle keys present in `kv` on top of `base`.
PhysicalParams apply_vehicle_keys(const KeyValueFile& kv, PhysicalParams base);
PhysicalParams load_physical_params(const std::string& path);

}  // namespace alq
