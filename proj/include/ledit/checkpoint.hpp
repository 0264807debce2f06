// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ledit/camera.hpp"
#include "ledit/field.hpp"

namespace ledit {

/// Saves `<prefix>.json` (dims, bbox, channel layout, counters) plus
/// `<prefix>.f32`, a flat little-endian float32 blob of density_raw,
/// color_raw, relevance_raw in that order.
void save_field(const std::string& prefix, const VoxelField& field);
VoxelField load_field(const std::string& prefix);

void save_cameras(const std::string& path, const std::vector<Camera>& cams);
std::vector<Camera> load_cameras(const std::string& path);

/// Posed captures as a directory of cameras.json + view_###.png.
void save_captures(const std::string& dir, const std::vector<PosedImage>& views);
std::vector<PosedImage> load_captures(const std::string& dir);

}  // namespace ledit
