#include "specmap/cube/spectral_cube.hpp"

#include <algorithm>
#include <cstdio>

#include "specmap/common/error.hpp"
#include "specmap/common/keyvalue.hpp"
#include "specmap/imaging/image_io.hpp"

namespace specmap::cube {

using imaging::Texture;

SpectralCube::SpectralCube(std::int32_t width, std::int32_t height, std::vector<BandDescriptor> bands,
                           std::vector<double> data, RegionMask valid)
    : width_(width), height_(height), bands_(std::move(bands)), data_(std::move(data)), valid_(std::move(valid)) {
    if (width_ < 1 || height_ < 1) throw ValidationError("cube dimensions must be at least 1x1");
    if (bands_.size() < 2) throw ValidationError("a spectral cube needs at least 2 bands");
    if (valid_.width != width_ || valid_.height != height_)
        throw ValidationError("validity mask dimensions differ from the cube");
    if (data_.size() != valid_.size() * bands_.size()) throw ValidationError("cube data has the wrong length");
    const std::size_t b = bands_.size();
    for (std::size_t i = 0; i < valid_.size(); ++i) {
        if (valid_.data[i]) continue;
        std::fill_n(data_.begin() + static_cast<std::ptrdiff_t>(i * b), b, 0.0);
    }
}

std::size_t SpectralCube::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.data.begin(), valid_.data.end(), std::uint8_t{1}));
}

bool SpectralCube::is_valid(Texel t) const { return valid_.contains(t) && valid_[t] != 0; }

std::optional<std::span<const double>> SpectralCube::spectrum_at(Texel t) const {
    if (!valid_.contains(t)) {
        throw ValidationError("texel (" + std::to_string(t.col) + "," + std::to_string(t.row) + ") outside " +
                              std::to_string(width_) + "x" + std::to_string(height_) + " cube");
    }
    if (!valid_[t]) return std::nullopt;
    return std::span<const double>(data_).subspan(valid_.index(t) * bands_.size(), bands_.size());
}

SpectralCube assemble(const std::vector<BandSource>& sources, const RegionMask& valid) {
    if (sources.empty()) throw ValidationError("no textures to assemble");
    const Texture& first = *sources.front().texture;
    std::vector<BandDescriptor> bands;
    for (const auto& src : sources) {
        const Texture& t = *src.texture;
        if (t.width != first.width || t.height != first.height) {
            throw ValidationError("texture '" + src.source + "' is " + std::to_string(t.width) + "x" +
                                  std::to_string(t.height) + ", expected " + std::to_string(first.width) + "x" +
                                  std::to_string(first.height));
        }
        for (std::int32_t c = 0; c < t.channels; ++c) bands.push_back({t.meta.modality, t.channel_name(c), src.source});
    }
    if (bands.size() < 2) throw ValidationError("a spectral cube needs at least 2 channels in total");
    if (valid.width != first.width || valid.height != first.height)
        throw ValidationError("validity mask dimensions differ from the textures");

    const std::size_t b = bands.size();
    const std::size_t texels = valid.size();
    std::vector<double> data(texels * b, 0.0);
    std::size_t offset = 0;
    for (const auto& src : sources) {
        const Texture& t = *src.texture;
        const auto ch = static_cast<std::size_t>(t.channels);
        for (std::size_t i = 0; i < texels; ++i) {
            if (!valid.data[i]) continue;
            for (std::size_t c = 0; c < ch; ++c) data[i * b + offset + c] = t.data[i * ch + c];
        }
        offset += ch;
    }
    return SpectralCube(first.width, first.height, std::move(bands), std::move(data), valid);
}

std::filesystem::path save_cube(const SpectralCube& cube, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    kv::Document doc;
    auto& top = doc.section("cube");
    top.set("width", kv::Value::of(static_cast<std::int64_t>(cube.width())));
    top.set("height", kv::Value::of(static_cast<std::int64_t>(cube.height())));
    top.set("bands", kv::Value::of(static_cast<std::int64_t>(cube.band_count())));
    top.set("layout", kv::Value::of("one 1-channel PFM per band; mask is a 1-channel PFM of 0/1"));
    top.set("mask", kv::Value::of("valid_mask.pfm"));

    const std::size_t b = cube.band_count();
    const auto samples = cube.samples();
    for (std::size_t k = 0; k < b; ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "band_%02zu.pfm", k);
        Texture band(cube.width(), cube.height(), 1);
        for (std::size_t i = 0; i < band.data.size(); ++i) band.data[i] = samples[i * b + k];
        imaging::save_texture(band, dir / name);

        auto& sec = doc.section("band." + std::to_string(k));
        sec.set("modality", kv::Value::of(std::string(imaging::to_string(cube.bands()[k].modality))));
        sec.set("channel", kv::Value::of(cube.bands()[k].channel));
        sec.set("source", kv::Value::of(cube.bands()[k].source));
        sec.set("file", kv::Value::of(std::string(name)));
    }
    Texture mask(cube.width(), cube.height(), 1);
    for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = cube.valid_mask().data[i] ? 1.0 : 0.0;
    imaging::save_texture(mask, dir / "valid_mask.pfm");

    const auto path = dir / kDescriptorName;
    imaging::write_file(path, kv::serialize(doc));
    return path;
}

SpectralCube load_cube(const std::filesystem::path& descriptor) {
    const kv::Document doc = kv::parse_file(descriptor);
    const auto dir = descriptor.parent_path();
    auto need = [&](std::string_view sec, std::string_view key) -> const kv::Value& {
        const kv::Value* v = doc.get(sec, key);
        if (!v) throw ValidationError(descriptor.string() + ": missing [" + std::string(sec) + "] " + std::string(key));
        return *v;
    };
    const auto width = static_cast<std::int32_t>(need("cube", "width").as_int("cube.width"));
    const auto height = static_cast<std::int32_t>(need("cube", "height").as_int("cube.height"));
    const auto nbands = static_cast<std::size_t>(need("cube", "bands").as_int("cube.bands"));

    const Texture mask_tex = imaging::load_texture(dir / need("cube", "mask").as_string("cube.mask"));
    if (mask_tex.width != width || mask_tex.height != height || mask_tex.channels != 1)
        throw ValidationError("cube mask does not match the descriptor dimensions");
    RegionMask valid(width, height, 0);
    for (std::size_t i = 0; i < valid.size(); ++i) {
        const double m = mask_tex.data[i];
        if (m != 0.0 && m != 1.0) throw ValidationError("cube mask must contain only 0 and 1");
        valid.data[i] = m == 1.0 ? 1 : 0;
    }

    std::vector<BandDescriptor> bands;
    std::vector<double> data(valid.size() * nbands, 0.0);
    for (std::size_t k = 0; k < nbands; ++k) {
        const std::string sec = "band." + std::to_string(k);
        BandDescriptor desc;
        desc.modality = imaging::modality_from_string(need(sec, "modality").as_string(sec + ".modality"));
        desc.channel = need(sec, "channel").as_string(sec + ".channel");
        desc.source = need(sec, "source").as_string(sec + ".source");
        const Texture band = imaging::load_texture(dir / need(sec, "file").as_string(sec + ".file"));
        if (band.width != width || band.height != height || band.channels != 1)
            throw ValidationError("band file for " + sec + " does not match the descriptor dimensions");
        for (std::size_t i = 0; i < valid.size(); ++i) data[i * nbands + k] = band.data[i];
        bands.push_back(std::move(desc));
    }
    return SpectralCube(width, height, std::move(bands), std::move(data), std::move(valid));
}

} // namespace specmap::cube
