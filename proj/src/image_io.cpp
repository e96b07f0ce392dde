#include "gmind/error.hpp"
#include "gmind/imaging.hpp"

#include "binary_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

namespace gmind {

namespace {

bool has_extension(const std::filesystem::path &path, std::string_view ext) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

[[noreturn]] void corrupt(const std::filesystem::path &path, const std::string &why) {
    throw Error(ErrorCode::unsupported_format, "unsupported/corrupt format: " + path.string() + " (" + why + ")");
}

// ---- PGM ------------------------------------------------------------------

class HeaderReader {
public:
    HeaderReader(std::span<const unsigned char> bytes, const std::filesystem::path &path)
        : bytes_(bytes), path_(path) {}

    long next_number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            corrupt(path_, "bad PGM header");
        }
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000'000) {
                corrupt(path_, "PGM header value too large");
            }
            ++pos_;
        }
        return v;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            corrupt(path_, "missing raster separator");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    std::span<const unsigned char> bytes_;
    const std::filesystem::path &path_;
    size_t pos_ = 2;
};

Image decode_pgm(std::span<const unsigned char> bytes, const std::filesystem::path &path) {
    HeaderReader hdr(bytes, path);
    const long width = hdr.next_number();
    const long height = hdr.next_number();
    const long maxval = hdr.next_number();
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
        corrupt(path, "invalid PGM dimensions or maxval");
    }
    const size_t offset = hdr.raster_offset();
    const size_t bpp = maxval > 255 ? 2 : 1;
    const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
    if (bytes.size() < offset + n * bpp) {
        corrupt(path, "truncated raster");
    }
    std::vector<double> data(n);
    for (size_t i = 0; i < n; ++i) {
        if (bpp == 1) {
            data[i] = bytes[offset + i];
        } else {
            data[i] = static_cast<double>((bytes[offset + 2 * i] << 8) | bytes[offset + 2 * i + 1]);
        }
    }
    return {static_cast<int>(width), static_cast<int>(height), std::move(data)};
}

std::vector<unsigned char> to_bytes(const Image &img) {
    std::vector<unsigned char> out(img.size());
    const auto data = img.data();
    for (size_t i = 0; i < out.size(); ++i) {
        // nearbyint honours the default round-half-to-even mode.
        out[i] = static_cast<unsigned char>(std::nearbyint(std::clamp(data[i], 0.0, 255.0)));
    }
    return out;
}

void encode_pgm(const Image &img, const std::filesystem::path &path) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    const auto raster = to_bytes(img);
    bytes.insert(bytes.end(), raster.begin(), raster.end());
    detail::write_file(path, bytes);
}

// ---- PNG ------------------------------------------------------------------

struct MemoryReader {
    std::span<const unsigned char> bytes;
    size_t pos = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto *reader = static_cast<MemoryReader *>(png_get_io_ptr(png));
    if (reader->pos + count > reader->bytes.size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, reader->bytes.data() + reader->pos, count);
    reader->pos += count;
}

void png_error_to_longjmp(png_structp png, png_const_charp) {
    png_longjmp(png, 1);
}

void png_silent_warning(png_structp, png_const_charp) {}

Image decode_png(std::span<const unsigned char> bytes, const std::filesystem::path &path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_longjmp, png_silent_warning);
    if (png == nullptr) {
        throw Error(ErrorCode::io_error, "libpng initialisation failed");
    }
    png_infop info = png_create_info_struct(png);
    MemoryReader reader{bytes, 0};
    // Everything touched after setjmp lives in these PODs so longjmp is safe.
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    bool is_color = false;
    std::vector<unsigned char> raster;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        corrupt(path, "invalid PNG stream");
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    is_color = (color_type & PNG_COLOR_MASK_COLOR) != 0;
    if (!is_color) {
        if (bit_depth < 8) {
            png_set_expand_gray_1_2_4_to_8(png);
        }
        if ((color_type & PNG_COLOR_MASK_ALPHA) != 0 || png_get_valid(png, info, PNG_INFO_tRNS)) {
            png_set_strip_alpha(png);
        }
        png_read_update_info(png, info);
        bit_depth = png_get_bit_depth(png, info);
        const size_t stride = png_get_rowbytes(png, info);
        raster.resize(stride * height);
        rows.resize(height);
        for (png_uint_32 y = 0; y < height; ++y) {
            rows[y] = raster.data() + y * stride;
        }
        png_read_image(png, rows.data());
    }
    png_destroy_read_struct(&png, &info, nullptr);

    if (is_color) {
        throw Error(ErrorCode::color_image, "color images are not supported: " + path.string());
    }
    const size_t n = static_cast<size_t>(width) * height;
    std::vector<double> data(n);
    for (size_t i = 0; i < n; ++i) {
        data[i] = bit_depth == 16 ? static_cast<double>((raster[2 * i] << 8) | raster[2 * i + 1]) : raster[i];
    }
    return {static_cast<int>(width), static_cast<int>(height), std::move(data)};
}

void encode_png(const Image &img, const std::filesystem::path &path) {
    const auto raster = to_bytes(img);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, raster.data(), 0, nullptr)) {
        throw Error(ErrorCode::io_error, std::string("PNG encode failed: ") + image.message);
    }
    std::vector<unsigned char> bytes(size);
    if (!png_image_write_to_memory(&image, bytes.data(), &size, 0, raster.data(), 0, nullptr)) {
        throw Error(ErrorCode::io_error, std::string("PNG encode failed: ") + image.message);
    }
    bytes.resize(size);
    png_image_free(&image);
    detail::write_file(path, bytes);
}

} // namespace

Image load_image(const std::filesystem::path &path) {
    const auto bytes = detail::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P') {
        switch (bytes[1]) {
        case '5':
            return decode_pgm(bytes, path);
        case '3':
        case '6':
            throw Error(ErrorCode::color_image, "color images are not supported: " + path.string());
        default:
            break;
        }
    }
    static constexpr unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) {
        return decode_png(bytes, path);
    }
    corrupt(path, "expected binary PGM (P5) or PNG");
}

void save_image(const Image &img, const std::filesystem::path &path) {
    if (img.empty()) {
        throw Error(ErrorCode::invalid_argument, "cannot save an empty image");
    }
    if (has_extension(path, ".png")) {
        encode_png(img, path);
    } else if (has_extension(path, ".pgm")) {
        encode_pgm(img, path);
    } else {
        throw Error(ErrorCode::unsupported_format, "output must end in .pgm or .png: " + path.string());
    }
}

} // namespace gmind
