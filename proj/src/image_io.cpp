#include "hfnerf/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#if defined(HFNERF_HAVE_PNG)
#include <png.h>
#endif

namespace hfnerf {

namespace {

int quantize(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<int>(std::lround(c * 255.0));
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open image for writing: " + path);
    os << "P3\n" << img.width << " " << img.height << "\n255\n";
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            os << quantize(img.at(x, y, 0)) << ' ' << quantize(img.at(x, y, 1)) << ' '
               << quantize(img.at(x, y, 2));
            os << (x + 1 == img.width ? '\n' : ' ');
        }
    }
    if (!os) throw std::runtime_error("failed writing image: " + path);
}

// reads the next PPM token, skipping whitespace and '#' comments
std::string next_token(std::istream& is) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

Image load_ppm(std::ifstream& is, const std::string& path, bool binary) {
    const int width = std::stoi(next_token(is));
    const int height = std::stoi(next_token(is));
    const int maxval = std::stoi(next_token(is));
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw std::runtime_error("bad ppm header: " + path);
    }
    Image img(width, height);
    const double inv = 1.0 / maxval;
    if (binary) {
        // single whitespace after maxval, then raw samples
        const std::size_t n = static_cast<std::size_t>(width) * height * 3;
        if (maxval > 255) throw std::runtime_error("16-bit P6 not supported: " + path);
        std::vector<unsigned char> buf(n);
        if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n))) {
            throw std::runtime_error("truncated ppm: " + path);
        }
        for (std::size_t i = 0; i < n; ++i) img.pixels[i] = buf[i] * inv;
    } else {
        for (auto& p : img.pixels) {
            const std::string tok = next_token(is);
            if (tok.empty()) throw std::runtime_error("truncated ppm: " + path);
            p = std::stoi(tok) * inv;
        }
    }
    return img;
}

#if defined(HFNERF_HAVE_PNG)

void write_png(const std::string& path, const Image& img) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open image for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png write failed: " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c)
                row[static_cast<std::size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(quantize(img.at(x, y, c)));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

Image load_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open image: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error("png read failed: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    // normalize everything to 8-bit RGB
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    Image img(width, height);
    std::vector<unsigned char> row(png_get_rowbytes(png, info));
    for (int y = 0; y < height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = row[static_cast<std::size_t>(x) * 3 + c] / 255.0;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

#endif  // HFNERF_HAVE_PNG

}  // namespace

void write_image(const std::string& path, const Image& img) {
    if (img.width <= 0 || img.height <= 0) {
        throw std::invalid_argument("write_image: empty image");
    }
    if (ends_with(path, ".png")) {
#if defined(HFNERF_HAVE_PNG)
        write_png(path, img);
        return;
#else
        throw std::runtime_error("png support not built in; use .ppm: " + path);
#endif
    }
    write_ppm(path, img);
}

Image load_image(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open image: " + path);
    char magic[2] = {0, 0};
    is.read(magic, 2);
    if (magic[0] == 'P' && (magic[1] == '3' || magic[1] == '6')) {
        return load_ppm(is, path, magic[1] == '6');
    }
    if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') {
#if defined(HFNERF_HAVE_PNG)
        is.close();
        return load_png(path);
#else
        throw std::runtime_error("png support not built in: " + path);
#endif
    }
    throw std::runtime_error("unrecognized image format: " + path);
}

}  // namespace hfnerf
