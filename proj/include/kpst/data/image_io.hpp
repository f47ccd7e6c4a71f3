#pragma once

#include <filesystem>

#include "kpst/data/image.hpp"

namespace kpst::data {

// Reads a PNG or JPEG (by extension) into 8-bit RGB. Grayscale and alpha
// inputs are converted. Throws IoError with the path on any failure.
RawImage read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RawImage& img);

}  // namespace kpst::data
