// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ledit/grid.hpp"
#include "ledit/relevance.hpp"

namespace ledit {

/// PFM, 32-bit little-endian floats ("PF" for 3 channels, "Pf" for 1), rows
/// bottom-to-top per the format convention.
void write_pfm(const std::string& path, const Image& image);
Image read_pfm(const std::string& path);

/// PNG. 3-channel images are written as 8-bit RGB, 1-channel as 8-bit
/// grayscale; values are clamped to [0,1] and quantized with round(v*255).
void write_png(const std::string& path, const Image& image);

/// 1-bit grayscale PNG for binary masks.
void write_mask_png(const std::string& path, const EditMask& mask);

/// Reads 8-bit RGB/RGBA/gray and 1-bit gray PNGs into [0,1] doubles.
Image read_png(const std::string& path);

EditMask read_mask_png(const std::string& path, MaskSpace space);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace ledit
