#pragma once

#include <string>

#include "omrkit/image.hpp"

namespace omrkit::img {

// Reads any PNG as 8-bit RGB. Throws IoError on missing or malformed files.
Image load_png(const std::string& path);

void save_png(const std::string& path, const Image& image);

} // namespace omrkit::img
