#include "omrkit/png_io.hpp"

#include "omrkit/error.hpp"

#include <png.h>

#include <cstring>

namespace omrkit::img {

Image load_png(const std::string& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw Error(ErrorCode::IoError, path + ": " + png.message);
    png.format = PNG_FORMAT_RGB;
    Image out;
    out.width = static_cast<int>(png.width);
    out.height = static_cast<int>(png.height);
    out.pixels.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr)) {
        std::string message = png.message;
        png_image_free(&png);
        throw Error(ErrorCode::IoError, path + ": " + message);
    }
    return out;
}

void save_png(const std::string& path, const Image& image) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr))
        throw Error(ErrorCode::IoError, path + ": " + png.message);
}

} // namespace omrkit::img
