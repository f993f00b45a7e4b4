#include "mslesion/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

namespace msl {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("unreadable file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

// --- PGM ---------------------------------------------------------------

struct PnmScanner {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            const char c = static_cast<char>(bytes[pos]);
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    long next_int() {
        skip_space_and_comments();
        if (pos >= bytes.size()) throw std::runtime_error("unexpected end of stream");
        if (!std::isdigit(bytes[pos])) throw std::runtime_error("malformed PGM header");
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            ++pos;
        }
        return v;
    }
};

GrayImage load_pgm(const std::vector<std::uint8_t>& bytes) {
    PnmScanner sc{bytes};
    const bool ascii = bytes[1] == '2';
    sc.pos = 2;
    const long w = sc.next_int();
    const long h = sc.next_int();
    const long maxval = sc.next_int();
    if (maxval <= 0 || maxval > 255) throw std::runtime_error("unsupported bit depth");

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    if (ascii) {
        for (std::size_t i = 0; i < img.size(); ++i) {
            const long v = sc.next_int();
            if (v > maxval) throw std::runtime_error("sample exceeds maxval");
            img.data[i] = static_cast<double>(v);
        }
    } else {
        ++sc.pos;  // single whitespace byte after maxval
        if (sc.pos + img.size() > bytes.size()) throw std::runtime_error("unexpected end of stream");
        for (std::size_t i = 0; i < img.size(); ++i)
            img.data[i] = static_cast<double>(bytes[sc.pos + i]);
    }
    validate_image(img);
    return img;
}

// --- PNG ---------------------------------------------------------------

constexpr std::uint8_t kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

// Decodes an 8-bit PNG with `channels` samples per pixel (1 = gray, 3 = RGB).
std::vector<std::uint8_t> decode_png(const std::vector<std::uint8_t>& bytes, int channels,
                                     int& width, int& height) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0)
        throw std::runtime_error("not a PNG file");

    std::size_t pos = 8;
    bool have_header = false;
    std::uint32_t w = 0, h = 0;
    std::vector<std::uint8_t> idat;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = be32(&bytes[pos]);
        const std::string type(reinterpret_cast<const char*>(&bytes[pos + 4]), 4);
        if (pos + 12 + len > bytes.size()) throw std::runtime_error("unexpected end of stream");
        const std::uint8_t* payload = &bytes[pos + 8];
        if (type == "IHDR") {
            if (len != 13) throw std::runtime_error("malformed IHDR");
            w = be32(payload);
            h = be32(payload + 4);
            const int bitdepth = payload[8];
            const int colortype = payload[9];
            const int interlace = payload[12];
            if (bitdepth != 8) throw std::runtime_error("unsupported bit depth");
            const int want = channels == 1 ? 0 : 2;
            if (colortype != want) throw std::runtime_error("unsupported color type");
            if (interlace != 0) throw std::runtime_error("unsupported interlaced PNG");
            have_header = true;
        } else if (type == "IDAT") {
            idat.insert(idat.end(), payload, payload + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (!have_header || w == 0 || h == 0) throw std::runtime_error("malformed PNG");

    const std::size_t stride = static_cast<std::size_t>(w) * channels;
    std::vector<std::uint8_t> raw((stride + 1) * h);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw std::runtime_error("unexpected end of stream");

    std::vector<std::uint8_t> pixels(stride * h);
    const int bpp = channels;
    for (std::uint32_t y = 0; y < h; ++y) {
        const std::uint8_t filter = raw[y * (stride + 1)];
        const std::uint8_t* src = &raw[y * (stride + 1) + 1];
        std::uint8_t* dst = &pixels[y * stride];
        const std::uint8_t* up = y > 0 ? &pixels[(y - 1) * stride] : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x >= static_cast<std::size_t>(bpp) ? dst[x - bpp] : 0;
            const int b = up ? up[x] : 0;
            const int c = (up && x >= static_cast<std::size_t>(bpp)) ? up[x - bpp] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw std::runtime_error("unsupported PNG filter");
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xff);
        }
    }
    width = static_cast<int>(w);
    height = static_cast<int>(h);
    return pixels;
}

void encode_png(std::span<const std::uint8_t> pixels, int width, int height, int channels,
                const std::filesystem::path& path) {
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    std::vector<std::uint8_t> raw((stride + 1) * height);
    for (int y = 0; y < height; ++y) {
        raw[y * (stride + 1)] = 0;  // filter: none
        std::memcpy(&raw[y * (stride + 1) + 1], &pixels[y * stride], stride);
    }
    std::vector<std::uint8_t> compressed(compressBound(static_cast<uLong>(raw.size())));
    uLongf comp_len = static_cast<uLongf>(compressed.size());
    if (compress2(compressed.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) !=
        Z_OK)
        throw std::runtime_error("PNG compression failed");
    compressed.resize(comp_len);

    std::vector<std::uint8_t> out(kPngSignature, kPngSignature + 8);
    auto chunk = [&out](const char* type, const std::vector<std::uint8_t>& payload) {
        put_be32(out, static_cast<std::uint32_t>(payload.size()));
        const std::size_t start = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), payload.begin(), payload.end());
        const uLong crc =
            crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
        put_be32(out, static_cast<std::uint32_t>(crc));
    };

    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(width));
    put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);                                            // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);                        // gray / RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    chunk("IHDR", ihdr);
    chunk("IDAT", compressed);
    chunk("IEND", {});
    write_file(path, out.data(), out.size());
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5'))
        return load_pgm(bytes);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
        int w = 0, h = 0;
        const auto pixels = decode_png(bytes, 1, w, h);
        GrayImage img(w, h);
        for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<double>(pixels[i]);
        validate_image(img);
        return img;
    }
    throw std::runtime_error("unsupported image format: " + path.string());
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                         "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.size());
    for (double v : img.data) out.push_back(to_byte(v));
    write_file(path, out.data(), out.size());
}

void save_pgm16(std::span<const std::uint32_t> values, int width, int height,
                const std::filesystem::path& path) {
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("dimension mismatch");
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                         "\n65535\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + values.size() * 2);
    for (std::uint32_t v : values) {
        // 65535 is reserved for the background label
        const std::uint32_t s = v > 65535u ? 65535u : v;
        out.push_back(static_cast<std::uint8_t>(s >> 8));
        out.push_back(static_cast<std::uint8_t>(s & 0xff));
    }
    write_file(path, out.data(), out.size());
}

std::vector<std::uint32_t> load_pgm16(const std::filesystem::path& path, int& width, int& height) {
    const auto bytes = read_file(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw std::runtime_error("not a binary PGM");
    PnmScanner sc{bytes};
    sc.pos = 2;
    const long w = sc.next_int();
    const long h = sc.next_int();
    const long maxval = sc.next_int();
    if (maxval != 65535) throw std::runtime_error("unsupported bit depth");
    ++sc.pos;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (sc.pos + 2 * n > bytes.size()) throw std::runtime_error("unexpected end of stream");
    std::vector<std::uint32_t> values(n);
    for (std::size_t i = 0; i < n; ++i)
        values[i] = (std::uint32_t(bytes[sc.pos + 2 * i]) << 8) | bytes[sc.pos + 2 * i + 1];
    width = static_cast<int>(w);
    height = static_cast<int>(h);
    return values;
}

namespace {

void write_overlay(const GrayImage& img, const std::function<bool(int, int)>& is_boundary,
                   const std::filesystem::path& path) {
    std::vector<std::uint8_t> rgb(img.size() * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * img.width + x) * 3;
            if (is_boundary(x, y)) {
                rgb[i] = 255;
                rgb[i + 1] = 0;
                rgb[i + 2] = 0;
            } else {
                const std::uint8_t g = to_byte(img.at(x, y));
                rgb[i] = rgb[i + 1] = rgb[i + 2] = g;
            }
        }
    }
    encode_png(rgb, img.width, img.height, 3, path);
}

}  // namespace

void save_overlay(const GrayImage& img, std::span<const std::uint32_t> labels,
                  const std::filesystem::path& path) {
    if (labels.size() != img.size()) throw std::invalid_argument("dimension mismatch");
    auto label_at = [&](int x, int y) { return labels[static_cast<std::size_t>(y) * img.width + x]; };
    write_overlay(
        img,
        [&](int x, int y) {
            const std::uint32_t l = label_at(x, y);
            if (x > 0 && label_at(x - 1, y) != l) return true;
            if (x + 1 < img.width && label_at(x + 1, y) != l) return true;
            if (y > 0 && label_at(x, y - 1) != l) return true;
            if (y + 1 < img.height && label_at(x, y + 1) != l) return true;
            return false;
        },
        path);
}

void save_overlay(const GrayImage& img, const BinaryMask& mask,
                  const std::filesystem::path& path) {
    if (!mask.same_shape(img)) throw std::invalid_argument("dimension mismatch");
    // edge = foreground pixel with a background 4-neighbor
    write_overlay(
        img,
        [&](int x, int y) {
            if (!mask.at(x, y)) return false;
            if (x > 0 && !mask.at(x - 1, y)) return true;
            if (x + 1 < img.width && !mask.at(x + 1, y)) return true;
            if (y > 0 && !mask.at(x, y - 1)) return true;
            if (y + 1 < img.height && !mask.at(x, y + 1)) return true;
            return false;
        },
        path);
}

void save_png_rgb(std::span<const std::uint8_t> rgb, int width, int height,
                  const std::filesystem::path& path) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::invalid_argument("dimension mismatch");
    encode_png(rgb, width, height, 3, path);
}

std::vector<std::uint8_t> load_png_rgb(const std::filesystem::path& path, int& width,
                                       int& height) {
    return decode_png(read_file(path), 3, width, height);
}

}  // namespace msl
