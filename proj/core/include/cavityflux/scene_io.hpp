#pragma once
/// @file scene_io.hpp
/// @brief JSON scene descriptions and the built-in preset scenes.
///
/// Schema (all lengths in unit lengths):
/// @code
/// {
///   "name": "fig1a",                                   // optional
///   "alpha": 0.1,                                      // optional, default 0
///   "cavities":  [{"id": "1", "origin": [0, 0], "side": 1}],
///   "discs":     [{"cavity": "1", "center": [0.3, 0.7], "radius": 0.1}],
///   "openings":  [{"id": "P1", "kind": "port",
///                  "wall": {"cavity": "1", "side": "top"},
///                  "center_offset": 0.5, "width": 0.1571}]
/// }
/// @endcode
/// `kind` is `port` (also `exterior-port`) or `aperture` (also
/// `inter-cavity-aperture`); `side` is one of bottom/right/top/left.

#include <string>
#include <string_view>
#include <vector>

#include "cavityflux/geometry.hpp"

namespace cavityflux {

/// Parses JSON text into a description. Throws ValidationError on schema errors.
SceneDescription parse_scene_json(std::string_view text);
std::string to_json(const SceneDescription& desc, int indent = 2);

/// Names accepted by preset_description().
std::vector<std::string> preset_names();
bool is_preset(std::string_view name);
/// Throws ValidationError for unknown names.
SceneDescription preset_description(std::string_view name);

/// Preset name or path to a JSON file.
SceneDescription load_scene_description(const std::string& preset_or_path);

/// Point sources used for the source-position comparisons (1-based index).
Point2 table1_source(int index);
inline constexpr int kTable1Count = 7;

}  // namespace cavityflux
