#pragma once

// JSON system spec files. Rationals travel as "p/q" strings; unknown keys
// are rejected so typos never silently fall back to defaults.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "circlerds/rds.hpp"
#include "json.hpp"

namespace circlerds {

using Json = nlohmann::json;

namespace detail {

inline void require_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorCode::ParseError, "unknown key '" + it.key() + "' in " + where);
}

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "' in " + where);
  return *it;
}

inline Rational rational_field(const Json& v, const std::string& where) {
  if (!v.is_string()) throw Error(ErrorCode::ParseError, where + " must be a \"p/q\" string");
  return parse_rational(v.get<std::string>());
}

}  // namespace detail

inline Homeo homeo_from_json(const Json& j, const std::string& where = "map") {
  const Json& type = detail::field(j, "type", where);
  if (!type.is_string()) throw Error(ErrorCode::ParseError, where + ".type must be a string");
  const std::string t = type.get<std::string>();
  if (t == "rotation") {
    detail::require_keys(j, {"type", "angle"}, where);
    return Homeo::rotation(detail::rational_field(detail::field(j, "angle", where), where + ".angle"));
  }
  if (t == "reflection") {
    detail::require_keys(j, {"type", "c"}, where);
    return Homeo::reflection(detail::rational_field(detail::field(j, "c", where), where + ".c"));
  }
  if (t != "pl") throw Error(ErrorCode::ParseError, where + ".type '" + t + "' is not pl, rotation or reflection");
  detail::require_keys(j, {"type", "orientation", "breakpoints"}, where);
  const Json& o = detail::field(j, "orientation", where);
  if (!o.is_string() || (o != "preserving" && o != "reversing"))
    throw Error(ErrorCode::ParseError, where + ".orientation must be \"preserving\" or \"reversing\"");
  const Json& bps = detail::field(j, "breakpoints", where);
  if (!bps.is_array()) throw Error(ErrorCode::ParseError, where + ".breakpoints must be an array");
  std::vector<Breakpoint> out;
  for (std::size_t k = 0; k < bps.size(); ++k) {
    const std::string w = where + ".breakpoints[" + std::to_string(k) + "]";
    if (!bps[k].is_array() || bps[k].size() != 2) throw Error(ErrorCode::ParseError, w + " must be a pair");
    out.push_back({CirclePoint(detail::rational_field(bps[k][0], w)), CirclePoint(detail::rational_field(bps[k][1], w))});
  }
  return Homeo::piecewise_linear(std::move(out), o == "preserving");
}

inline Json homeo_to_json(const Homeo& f) {
  switch (f.kind()) {
    case Homeo::Kind::Rotation: return Json{{"type", "rotation"}, {"angle", to_string(f.parameter())}};
    case Homeo::Kind::Reflection: return Json{{"type", "reflection"}, {"c", to_string(f.parameter())}};
    case Homeo::Kind::PiecewiseLinear: break;
  }
  Json bps = Json::array();
  for (const auto& b : f.breakpoints()) bps.push_back(Json::array({b.x.str(), b.y.str()}));
  return Json{{"type", "pl"}, {"orientation", f.preserves_orientation() ? "preserving" : "reversing"}, {"breakpoints", bps}};
}

inline SystemSpec system_from_json(const Json& j) {
  detail::require_keys(j, {"label", "maps", "weights"}, "system");
  const Json& label = detail::field(j, "label", "system");
  if (!label.is_string()) throw Error(ErrorCode::ParseError, "label must be a string");
  const Json& maps = detail::field(j, "maps", "system");
  const Json& weights = detail::field(j, "weights", "system");
  if (!maps.is_array() || !weights.is_array()) throw Error(ErrorCode::ParseError, "maps and weights must be arrays");
  std::vector<Homeo> fs;
  for (std::size_t i = 0; i < maps.size(); ++i) fs.push_back(homeo_from_json(maps[i], "maps[" + std::to_string(i) + "]"));
  std::vector<Rational> ws;
  for (std::size_t i = 0; i < weights.size(); ++i)
    ws.push_back(detail::rational_field(weights[i], "weights[" + std::to_string(i) + "]"));
  return SystemSpec(std::move(fs), std::move(ws), label.get<std::string>());
}

inline Json system_to_json(const SystemSpec& s) {
  Json maps = Json::array(), weights = Json::array();
  for (const auto& f : s.maps()) maps.push_back(homeo_to_json(f));
  for (const auto& w : s.weights()) weights.push_back(to_string(w));
  return Json{{"label", s.label()}, {"maps", maps}, {"weights", weights}};
}

inline SystemSpec parse_system(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
  }
  return system_from_json(j);
}

inline SystemSpec load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

inline void save_system(const SystemSpec& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
  out << system_to_json(s).dump(2) << "\n";
}

}  // namespace circlerds
