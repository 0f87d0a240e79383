#include "cavityflux/scene_io.hpp"

#include <array>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cavityflux/errors.hpp"

namespace cavityflux {

using nlohmann::json;

namespace {

// Disc centres are estimates read off the published floor plans; any of
// them can be overridden by loading an edited copy from JSON.
constexpr std::string_view kFig1a = R"({
  "name": "fig1a",
  "alpha": 0.0,
  "cavities": [
    {"id": "1", "origin": [0.0, 0.0], "side": 1.0},
    {"id": "2", "origin": [1.0, 0.0], "side": 1.0}
  ],
  "discs": [
    {"cavity": "1", "center": [0.3, 0.75], "radius": 0.1},
    {"cavity": "1", "center": [0.7, 0.75], "radius": 0.1},
    {"cavity": "1", "center": [0.5, 0.22], "radius": 0.1},
    {"cavity": "2", "center": [1.3, 0.35], "radius": 0.1},
    {"cavity": "2", "center": [1.65, 0.6], "radius": 0.1},
    {"cavity": "2", "center": [1.4, 0.75], "radius": 0.1}
  ],
  "openings": [
    {"id": "P1", "kind": "port", "wall": {"cavity": "1", "side": "top"}, "center_offset": 0.5, "width": 0.1571},
    {"id": "P2", "kind": "port", "wall": {"cavity": "2", "side": "top"}, "center_offset": 0.5, "width": 0.1571},
    {"id": "A", "kind": "aperture", "wall": {"cavity": "1", "side": "right"}, "center_offset": 0.5, "width": 0.2}
  ]
})";

constexpr std::string_view kFig1b = R"({
  "name": "fig1b",
  "alpha": 0.0,
  "cavities": [
    {"id": "1", "origin": [0.0, 0.0], "side": 1.0},
    {"id": "2", "origin": [1.0, 0.0], "side": 1.0}
  ],
  "discs": [
    {"cavity": "1", "center": [0.25, 0.3], "radius": 0.1},
    {"cavity": "1", "center": [0.45, 0.55], "radius": 0.1},
    {"cavity": "1", "center": [0.75, 0.2], "radius": 0.1},
    {"cavity": "2", "center": [1.3, 0.35], "radius": 0.1},
    {"cavity": "2", "center": [1.65, 0.6], "radius": 0.1},
    {"cavity": "2", "center": [1.4, 0.75], "radius": 0.1}
  ],
  "openings": [
    {"id": "P1", "kind": "port", "wall": {"cavity": "1", "side": "top"}, "center_offset": 0.5, "width": 0.1571},
    {"id": "P2", "kind": "port", "wall": {"cavity": "2", "side": "top"}, "center_offset": 0.5, "width": 0.1571},
    {"id": "A", "kind": "aperture", "wall": {"cavity": "1", "side": "right"}, "center_offset": 0.5, "width": 0.2}
  ]
})";

constexpr std::string_view kFig2 = R"({
  "name": "fig2",
  "alpha": 0.0,
  "cavities": [{"id": "1", "origin": [0.0, 0.0], "side": 1.0}],
  "discs": [
    {"cavity": "1", "center": [0.3, 0.75], "radius": 0.1},
    {"cavity": "1", "center": [0.7, 0.75], "radius": 0.1},
    {"cavity": "1", "center": [0.5, 0.22], "radius": 0.1}
  ],
  "openings": [
    {"id": "P1", "kind": "port", "wall": {"cavity": "1", "side": "top"}, "center_offset": 0.5, "width": 0.1571},
    {"id": "PA", "kind": "port", "wall": {"cavity": "1", "side": "right"}, "center_offset": 0.5, "width": 0.2}
  ]
})";

constexpr std::string_view kFig3 = R"({
  "name": "fig3",
  "alpha": 0.0,
  "cavities": [{"id": "1", "origin": [0.0, 0.0], "side": 1.0}],
  "discs": [
    {"cavity": "1", "center": [0.3, 0.75], "radius": 0.1},
    {"cavity": "1", "center": [0.7, 0.75], "radius": 0.1},
    {"cavity": "1", "center": [0.5, 0.22], "radius": 0.1}
  ],
  "openings": [
    {"id": "P1", "kind": "port", "wall": {"cavity": "1", "side": "top"}, "center_offset": 0.5, "width": 0.01571},
    {"id": "PA", "kind": "port", "wall": {"cavity": "1", "side": "right"}, "center_offset": 0.5, "width": 0.02}
  ]
})";

struct Preset {
  std::string_view name;
  std::string_view text;
};
constexpr std::array<Preset, 4> kPresets{{{"fig1a", kFig1a}, {"fig1b", kFig1b}, {"fig2", kFig2}, {"fig3", kFig3}}};

constexpr std::array<Point2, kTable1Count> kTable1{
    {{0.1, 0.9}, {0.9, 0.1}, {0.5, 0.4}, {0.4, 0.1}, {0.25, 0.2}, {0.9, 0.9}, {0.1, 0.5}}};

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

std::string text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError(where + ": expected a string");
}

Point2 point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ValidationError(where + ": expected [x, y]");
  return {number(v[0], where + "[0]"), number(v[1], where + "[1]")};
}

const json& list(const json& root, const char* key, bool required) {
  static const json empty = json::array();
  if (!root.contains(key)) {
    if (required) throw ValidationError(std::string("scene: missing key '") + key + "'");
    return empty;
  }
  const json& v = root.at(key);
  if (!v.is_array()) throw ValidationError(std::string("scene: '") + key + "' must be a list");
  return v;
}

Side parse_side(const std::string& s, const std::string& where) {
  if (s == "bottom") return Side::Bottom;
  if (s == "right") return Side::Right;
  if (s == "top") return Side::Top;
  if (s == "left") return Side::Left;
  throw ValidationError(where + ": unknown wall side '" + s + "'");
}

OpeningKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "port" || s == "exterior-port") return OpeningKind::Port;
  if (s == "aperture" || s == "inter-cavity-aperture") return OpeningKind::Aperture;
  throw ValidationError(where + ": unknown opening kind '" + s + "'");
}

}  // namespace

SceneDescription parse_scene_json(std::string_view text_in) {
  json root;
  try {
    root = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scene: malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("scene: top level must be an object");

  SceneDescription d;
  if (root.contains("name")) d.name = text(root.at("name"), "scene.name");
  if (root.contains("alpha")) d.alpha = number(root.at("alpha"), "scene.alpha");

  const json& cavs = list(root, "cavities", true);
  for (std::size_t i = 0; i < cavs.size(); ++i) {
    const std::string where = "cavities[" + std::to_string(i) + "]";
    CavitySpec c;
    c.id = text(require(cavs[i], "id", where), where + ".id");
    c.origin = point(require(cavs[i], "origin", where), where + ".origin");
    c.side = cavs[i].contains("side") ? number(cavs[i].at("side"), where + ".side") : 1.0;
    d.cavities.push_back(c);
  }
  const json& discs = list(root, "discs", false);
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const std::string where = "discs[" + std::to_string(i) + "]";
    DiscSpec s;
    s.cavity = text(require(discs[i], "cavity", where), where + ".cavity");
    s.center = point(require(discs[i], "center", where), where + ".center");
    s.radius = number(require(discs[i], "radius", where), where + ".radius");
    d.discs.push_back(s);
  }
  const json& ops = list(root, "openings", false);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const std::string where = "openings[" + std::to_string(i) + "]";
    OpeningSpec o;
    o.id = text(require(ops[i], "id", where), where + ".id");
    o.kind = parse_kind(text(require(ops[i], "kind", where), where + ".kind"), where + ".kind");
    const json& wall = require(ops[i], "wall", where);
    o.wall.cavity = text(require(wall, "cavity", where + ".wall"), where + ".wall.cavity");
    o.wall.side = parse_side(text(require(wall, "side", where + ".wall"), where + ".wall.side"), where + ".wall.side");
    o.center_offset = number(require(ops[i], "center_offset", where), where + ".center_offset");
    o.width = number(require(ops[i], "width", where), where + ".width");
    d.openings.push_back(o);
  }
  return d;
}

std::string to_json(const SceneDescription& desc, int indent) {
  json root;
  root["name"] = desc.name;
  root["alpha"] = desc.alpha;
  root["cavities"] = json::array();
  for (const auto& c : desc.cavities)
    root["cavities"].push_back({{"id", c.id}, {"origin", {c.origin.x, c.origin.y}}, {"side", c.side}});
  root["discs"] = json::array();
  for (const auto& s : desc.discs)
    root["discs"].push_back({{"cavity", s.cavity}, {"center", {s.center.x, s.center.y}}, {"radius", s.radius}});
  root["openings"] = json::array();
  for (const auto& o : desc.openings) {
    root["openings"].push_back({{"id", o.id},
                                {"kind", to_string(o.kind)},
                                {"wall", {{"cavity", o.wall.cavity}, {"side", to_string(o.wall.side)}}},
                                {"center_offset", o.center_offset},
                                {"width", o.width}});
  }
  return root.dump(indent);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

bool is_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return true;
  return false;
}

SceneDescription preset_description(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return parse_scene_json(p.text);
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

SceneDescription load_scene_description(const std::string& preset_or_path) {
  if (is_preset(preset_or_path)) return preset_description(preset_or_path);
  std::ifstream in(preset_or_path);
  if (!in) throw ValidationError("cannot open scene file '" + preset_or_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  SceneDescription d = parse_scene_json(buf.str());
  if (d.name.empty()) d.name = preset_or_path;
  return d;
}

Point2 table1_source(int index) {
  if (index < 1 || index > kTable1Count)
    throw ValidationError("table1 source index " + std::to_string(index) + " outside 1.." +
                          std::to_string(kTable1Count));
  return kTable1[static_cast<std::size_t>(index - 1)];
}

}  // namespace cavityflux
