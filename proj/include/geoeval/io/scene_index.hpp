#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoeval/error.hpp"
#include "geoeval/sampling.hpp"

namespace geoeval {

/// Orthogonal scene attributes, each from a closed vocabulary.
struct SceneTags {
  std::string environment = "indoor";  ///< indoor | outdoor | both
  std::string dynamics = "static";     ///< static | dynamic
  std::string view_type = "normal";    ///< normal | egocentric | wrist | mixed
  std::string source = "real";         ///< real | simulation | mixed

  friend bool operator==(const SceneTags&, const SceneTags&) = default;

  [[nodiscard]] std::optional<std::string> get(std::string_view key) const {
    if (key == "environment") return environment;
    if (key == "dynamics") return dynamics;
    if (key == "view_type") return view_type;
    if (key == "source") return source;
    return std::nullopt;
  }
};

struct TagVocabulary {
  std::string_view key;
  std::array<std::string_view, 4> values;
  std::size_t count;
};

inline constexpr std::array<TagVocabulary, 4> kTagVocabulary = {{
    {"environment", {"indoor", "outdoor", "both", ""}, 3},
    {"dynamics", {"static", "dynamic", "", ""}, 2},
    {"view_type", {"normal", "egocentric", "wrist", "mixed"}, 4},
    {"source", {"real", "simulation", "mixed", ""}, 3},
}};

inline bool is_tag_key(std::string_view key) {
  return std::any_of(kTagVocabulary.begin(), kTagVocabulary.end(),
                     [&](const auto& v) { return v.key == key; });
}

/// Throws ParseError unless `value` belongs to the vocabulary of `key`.
inline void check_tag(std::string_view key, std::string_view value) {
  for (const auto& v : kTagVocabulary) {
    if (v.key != key) continue;
    for (std::size_t i = 0; i < v.count; ++i) {
      if (v.values[i] == value) return;
    }
    std::string allowed;
    for (std::size_t i = 0; i < v.count; ++i) allowed += (i ? "|" : "") + std::string(v.values[i]);
    throw ParseError("tags." + std::string(key) + ": unknown value '" + std::string(value) +
                     "' (allowed: " + allowed + ")");
  }
  throw ParseError("tags: unknown key '" + std::string(key) + "'");
}

/// Frame indices every evaluated method consumes, per regime.
struct SceneIndex {
  std::string scene_id;
  std::string dataset;
  SceneTags tags;
  std::map<Regime, std::vector<std::int64_t>> regimes;

  friend bool operator==(const SceneIndex&, const SceneIndex&) = default;

  [[nodiscard]] const std::vector<std::int64_t>& frames(Regime r) const {
    const auto it = regimes.find(r);
    if (it == regimes.end()) {
      throw DataError("scene " + scene_id + " has no " + std::string(to_string(r)) + " regime");
    }
    return it->second;
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& key,
                                         const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

inline std::string require_string(const nlohmann::json& obj, const std::string& key,
                                  const std::string& where) {
  const auto& v = require_key(obj, key, where);
  if (!v.is_string()) throw ParseError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

}  // namespace detail

inline nlohmann::json tags_to_json(const SceneTags& t) {
  return {{"environment", t.environment},
          {"dynamics", t.dynamics},
          {"view_type", t.view_type},
          {"source", t.source}};
}

inline SceneTags tags_from_json(const nlohmann::json& j, const std::string& where = "tags") {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  detail::reject_unknown_keys(j, {"environment", "dynamics", "view_type", "source"}, where);
  SceneTags t;
  t.environment = detail::require_string(j, "environment", where);
  t.dynamics = detail::require_string(j, "dynamics", where);
  t.view_type = detail::require_string(j, "view_type", where);
  t.source = detail::require_string(j, "source", where);
  check_tag("environment", t.environment);
  check_tag("dynamics", t.dynamics);
  check_tag("view_type", t.view_type);
  check_tag("source", t.source);
  return t;
}

inline nlohmann::json to_json(const SceneIndex& s) {
  nlohmann::json regimes = nlohmann::json::object();
  for (const auto& [r, frames] : s.regimes) regimes[std::string(to_string(r))] = frames;
  return {{"scene_id", s.scene_id},
          {"dataset", s.dataset},
          {"tags", tags_to_json(s.tags)},
          {"regimes", regimes}};
}

inline SceneIndex scene_index_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("scene index: expected a JSON object");
  detail::reject_unknown_keys(j, {"scene_id", "dataset", "tags", "regimes"}, "scene index");
  SceneIndex s;
  s.scene_id = detail::require_string(j, "scene_id", "scene index");
  s.dataset = detail::require_string(j, "dataset", "scene index");
  s.tags = tags_from_json(detail::require_key(j, "tags", "scene index"));
  const auto& regimes = detail::require_key(j, "regimes", "scene index");
  if (!regimes.is_object()) throw ParseError("regimes: expected an object");
  for (const auto& [name, arr] : regimes.items()) {
    const std::string where = "regimes." + name;
    Regime r{};
    try {
      r = regime_from_string(name);
    } catch (const InvalidArgument&) {
      throw ParseError("regimes: unknown regime '" + name + "'");
    }
    if (!arr.is_array()) throw ParseError(where + ": expected an array");
    RegimeSelection sel{r, {}};
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const auto& v = arr[k];
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ParseError(where + "[" + std::to_string(k) + "]: expected a non-negative integer");
      }
      sel.frames.push_back(v.get<std::int64_t>());
    }
    try {
      sel.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(where + ": " + e.what());
    }
    s.regimes[r] = std::move(sel.frames);
  }
  return s;
}

/// Parses JSON text; syntax errors carry the line and column.
inline SceneIndex parse_scene_index(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scene index: malformed JSON: ") + e.what());
  }
  return scene_index_from_json(j);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

inline SceneIndex load_scene_index(const std::filesystem::path& path) {
  try {
    return parse_scene_index(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_scene_index(const SceneIndex& s, const std::filesystem::path& path) {
  write_text_file(path, to_json(s).dump(2) + "\n");
}

}  // namespace geoeval
