#include "alq/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "alq/errors.hpp"

namespace alq {
namespace {

KeyValueFile from_stream(std::istream& in, const std::string& origin,
                         std::map<std::string, std::string>& values) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw ConfigError(origin + ": sections are not supported ([" + key + "])");
    values[key] = node.data();
  }
  return {};
}

}  // namespace

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "': file not found");
  KeyValueFile kv;
  kv.origin_ = path;
  from_stream(in, path, kv.values_);
  return kv;
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  KeyValueFile kv;
  kv.origin_ = origin;
  from_stream(in, origin, kv.values_);
  return kv;
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueFile::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(*s, &used);
    if (used != s->size()) throw std::invalid_argument(*s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' expects a number, got '" + *s + "'");
  }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return get_double(key).value_or(fallback);
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  const auto s = get_string(key);
  if (!s) return fallback;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(*s, &used);
    if (used != s->size()) throw std::invalid_argument(*s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "' expects an integer, got '" + *s + "'");
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  const auto s = get_string(key);
  if (!s) return fallback;
  if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
  if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "' expects a boolean, got '" + *s + "'");
}

void KeyValueFile::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_)
    if (!known.count(key)) throw ConfigError(origin_ + ": unknown key '" + key + "'");
}

const std::set<std::string>& vehicle_keys() {
  static const std::set<std::string> keys{
      "arm_inertia",        "arm_mass",           "arm_com_radius",
      "arm_length",         "body_mass",          "upper_link_mass",
      "upper_link_length",  "damper_mass",        "link_offset_b",
      "link_offset_d",      "linkage_offset_deg", "gravity",
      "link_angle_ref",     "link_ratio",         "linkage_ref_angle",
      "cylinder_preload",   "cylinder_rate",      "passive_stiffness",
      "passive_damping",    "passive_rest_angle", "contact_stiffness",
      "contact_damping",    "arm_angle_min",      "arm_angle_max"};
  return keys;
}

PhysicalParams apply_vehicle_keys(const KeyValueFile& kv, PhysicalParams p) {
  auto set = [&kv](const char* key, double& field) { field = kv.get_double(key, field); };
  set("arm_inertia", p.arm_inertia);
  set("arm_mass", p.arm_mass);
  set("arm_com_radius", p.arm_com_radius);
  set("arm_length", p.arm_length);
  set("body_mass", p.body_mass);
  set("upper_link_mass", p.upper_link_mass);
  set("upper_link_length", p.upper_link_length);
  set("damper_mass", p.damper_mass);
  set("link_offset_b", p.link_offset_b);
  set("link_offset_d", p.link_offset_d);
  if (const auto deg = kv.get_double("linkage_offset_deg")) p.linkage_offset_angle = *deg * M_PI / 180.0;
  set("gravity", p.gravity);
  set("link_angle_ref", p.link_angle_ref);
  set("link_ratio", p.link_ratio);
  set("linkage_ref_angle", p.linkage_ref_angle);
  set("cylinder_preload", p.cylinder.preload);
  set("cylinder_rate", p.cylinder.rate);
  set("passive_stiffness", p.passive_stiffness);
  set("passive_damping", p.passive_damping);
  set("passive_rest_angle", p.passive_rest_angle);
  set("contact_stiffness", p.contact_stiffness);
  set("contact_damping", p.contact_damping);
  set("arm_angle_min", p.arm_angle_min);
  set("arm_angle_max", p.arm_angle_max);
  p.cylinder.ref_angle = p.linkage_ref_angle;
  p.cylinder.crank = p.link_offset_d;
  return p;
}

PhysicalParams load_physical_params(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  kv.reject_unknown(vehicle_keys());
  PhysicalParams p = apply_vehicle_keys(kv, PhysicalParams{});
  p.validate();
  return p;
}

}  // namespace alq
