#include "specmap/imaging/image_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <png.h>

#include "specmap/common/error.hpp"

namespace specmap::imaging {
namespace {

bool is_space(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

// Reads one whitespace-delimited header token starting at pos.
std::string_view next_token(std::string_view bytes, std::size_t& pos) {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
    if (start == pos) throw ValidationError("truncated PFM header");
    return bytes.substr(start, pos - start);
}

std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

// ---- PNG plumbing (libpng signals errors with longjmp) ----

struct MemReader {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->size) png_error(png, "unexpected end of PNG data");
    std::memcpy(out, r->data + r->pos, n);
    r->pos += n;
}

void png_write_mem(png_structp png, png_bytep in, png_size_t n) {
    auto* s = static_cast<std::string*>(png_get_io_ptr(png));
    s->append(reinterpret_cast<const char*>(in), n);
}

void png_flush_noop(png_structp) {}

void png_warn_silent(png_structp, png_const_charp) {}

struct PngRaw {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int channels = 0;
    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
    char error[256] = {0};
};

void png_error_record(png_structp png, png_const_charp msg) {
    auto* raw = static_cast<PngRaw*>(png_get_error_ptr(png));
    std::snprintf(raw->error, sizeof(raw->error), "%s", msg);
    png_longjmp(png, 1);
}

// Only objects constructed by the caller are touched after setjmp.
bool png_decode_raw(MemReader* reader, PngRaw* raw) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, raw, png_error_record, png_warn_silent);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, reader, png_read_mem);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
        depth = 8;
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
        depth = 8;
    }
    png_read_update_info(png, info);

    raw->width = png_get_image_width(png, info);
    raw->height = png_get_image_height(png, info);
    raw->channels = png_get_channels(png, info);
    raw->bit_depth = depth;
    if (raw->channels != 1 && raw->channels != 3) {
        std::snprintf(raw->error, sizeof(raw->error), "unsupported channel count %d", raw->channels);
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    const png_size_t rowbytes = png_get_rowbytes(png, info);
    raw->pixels.resize(rowbytes * raw->height);
    raw->rows.resize(raw->height);
    for (png_uint_32 y = 0; y < raw->height; ++y) raw->rows[y] = raw->pixels.data() + y * rowbytes;
    png_read_image(png, raw->rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

bool png_encode_raw(std::int32_t width, std::int32_t height, int color_type, int channels, const std::uint8_t* samples,
                    std::string* out, PngRaw* err) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_record, png_warn_silent);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, out, png_write_mem, png_flush_noop);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    for (std::int32_t y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(samples + static_cast<std::size_t>(y) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

} // namespace

Texture decode_pfm(std::string_view bytes) {
    std::size_t pos = 0;
    const auto magic = next_token(bytes, pos);
    int channels = 0;
    if (magic == "PF") channels = 3;
    else if (magic == "Pf") channels = 1;
    else throw ValidationError("unsupported format: not a PFM file");

    auto parse_int = [&](std::string_view tok) {
        long long v = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size()) throw ValidationError("bad PFM dimension");
        return v;
    };
    const long long width = parse_int(next_token(bytes, pos));
    const long long height = parse_int(next_token(bytes, pos));
    const auto scale_tok = next_token(bytes, pos);
    double scale = 0.0;
    {
        const auto [p, ec] = std::from_chars(scale_tok.data(), scale_tok.data() + scale_tok.size(), scale);
        if (ec != std::errc{} || p != scale_tok.data() + scale_tok.size() || scale == 0.0 || !std::isfinite(scale))
            throw ValidationError("bad PFM scale");
    }
    if (pos >= bytes.size() || !is_space(bytes[pos])) throw ValidationError("truncated PFM header");
    ++pos;  // single whitespace byte before the raster

    if (width <= 0 || height <= 0) throw ValidationError("PFM dimension 0");
    if (width > INT32_MAX || height > INT32_MAX) throw ValidationError("PFM dimensions too large");
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
    if (bytes.size() - pos < count * 4) throw ValidationError("truncated PFM raster");

    const bool little = scale < 0.0;
    const bool swap = little != (std::endian::native == std::endian::little);
    Texture tex(static_cast<std::int32_t>(width), static_cast<std::int32_t>(height), channels);
    const std::size_t row_samples = static_cast<std::size_t>(width) * channels;
    for (long long file_row = 0; file_row < height; ++file_row) {
        const std::size_t mem_row = static_cast<std::size_t>(height - 1 - file_row);
        const char* src = bytes.data() + pos + static_cast<std::size_t>(file_row) * row_samples * 4;
        double* dst = tex.data.data() + mem_row * row_samples;
        for (std::size_t i = 0; i < row_samples; ++i) {
            std::uint32_t bits;
            std::memcpy(&bits, src + 4 * i, 4);
            if (swap) bits = byteswap32(bits);
            const float value = std::bit_cast<float>(bits);
            if (!std::isfinite(value)) throw ValidationError("PFM contains NaN or Inf");
            dst[i] = static_cast<double>(value);
        }
    }
    return tex;
}

std::string encode_pfm(const Texture& tex) {
    tex.validate();
    std::string out = (tex.channels == 3 ? "PF\n" : "Pf\n") + std::to_string(tex.width) + " " +
                      std::to_string(tex.height) + "\n-1.0\n";
    const std::size_t row_samples = static_cast<std::size_t>(tex.width) * tex.channels;
    const std::size_t header = out.size();
    out.resize(header + row_samples * tex.height * 4);
    const bool swap = std::endian::native != std::endian::little;
    for (std::int32_t file_row = 0; file_row < tex.height; ++file_row) {
        const std::size_t mem_row = static_cast<std::size_t>(tex.height - 1 - file_row);
        const double* src = tex.data.data() + mem_row * row_samples;
        char* dst = out.data() + header + static_cast<std::size_t>(file_row) * row_samples * 4;
        for (std::size_t i = 0; i < row_samples; ++i) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(src[i]));
            if (swap) bits = byteswap32(bits);
            std::memcpy(dst + 4 * i, &bits, 4);
        }
    }
    return out;
}

Texture decode_png(std::string_view bytes) {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
        throw ValidationError("unsupported format: not a PNG file");
    MemReader reader{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
    PngRaw raw;
    if (!png_decode_raw(&reader, &raw))
        throw ValidationError(std::string("PNG decode failed: ") + (raw.error[0] ? raw.error : "libpng error"));
    if (raw.width == 0 || raw.height == 0) throw ValidationError("PNG dimension 0");

    Texture tex(static_cast<std::int32_t>(raw.width), static_cast<std::int32_t>(raw.height), raw.channels);
    const std::size_t n = tex.data.size();
    if (raw.bit_depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned v = (static_cast<unsigned>(raw.pixels[2 * i]) << 8) | raw.pixels[2 * i + 1];
            tex.data[i] = static_cast<double>(v) / 65535.0;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) tex.data[i] = static_cast<double>(raw.pixels[i]) / 255.0;
    }
    return tex;
}

std::string encode_png8(std::int32_t width, std::int32_t height, std::int32_t channels,
                        std::span<const std::uint8_t> samples) {
    int color_type = 0;
    switch (channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
    default: throw ValidationError("unsupported channel count " + std::to_string(channels));
    }
    if (width < 1 || height < 1) throw ValidationError("PNG dimensions must be at least 1x1");
    if (samples.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels)
        throw ValidationError("PNG sample buffer has the wrong size");
    std::string out;
    PngRaw err;
    if (!png_encode_raw(width, height, color_type, channels, samples.data(), &out, &err))
        throw RuntimeError(std::string("PNG encode failed: ") + err.error);
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw RuntimeError("cannot write file: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw RuntimeError("failed writing file: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw RuntimeError("cannot move " + tmp.string() + " into place: " + ec.message());
}

Texture load_texture(const std::filesystem::path& path, const BandMeta& meta) {
    const std::string bytes = read_file(path);
    Texture tex;
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == 'F' || bytes[1] == 'f')) {
        tex = decode_pfm(bytes);
    } else if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
        tex = decode_png(bytes);
    } else {
        throw ValidationError("unsupported format: " + path.string() + " is neither PFM nor PNG");
    }
    tex.meta = meta;
    tex.validate();
    return tex;
}

void save_texture(const Texture& tex, const std::filesystem::path& path) { write_file(path, encode_pfm(tex)); }

} // namespace specmap::imaging
