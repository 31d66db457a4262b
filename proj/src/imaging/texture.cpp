#include "specmap/imaging/texture.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "specmap/common/error.hpp"

namespace specmap::imaging {

std::string_view to_string(Modality m) {
    switch (m) {
    case Modality::VIS: return "VIS";
    case Modality::UVF: return "UVF";
    case Modality::IRR: return "IRR";
    case Modality::OTHER: return "OTHER";
    }
    return "OTHER";
}

Modality modality_from_string(std::string_view name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "VIS") return Modality::VIS;
    if (up == "UVF") return Modality::UVF;
    if (up == "IRR") return Modality::IRR;
    if (up == "OTHER") return Modality::OTHER;
    throw ValidationError("unknown modality '" + std::string(name) + "' (expected VIS, UVF, IRR or OTHER)");
}

Texture::Texture(std::int32_t w, std::int32_t h, std::int32_t c, BandMeta m)
    : width(w), height(h), channels(c), meta(std::move(m)) {
    if (w < 1 || h < 1) throw ValidationError("texture dimensions must be at least 1x1");
    if (c != 1 && c != 3) throw ValidationError("unsupported channel count " + std::to_string(c));
    data.assign(texel_count() * static_cast<std::size_t>(c), 0.0);
}

std::string Texture::channel_name(std::int32_t ch) const {
    if (static_cast<std::size_t>(ch) < meta.channel_names.size()) return meta.channel_names[static_cast<std::size_t>(ch)];
    if (channels == 1) return "Y";
    static const char* rgb[] = {"R", "G", "B"};
    return ch >= 0 && ch < 3 ? rgb[ch] : "C" + std::to_string(ch);
}

void Texture::validate() const {
    if (width < 1 || height < 1) throw ValidationError("texture dimensions must be at least 1x1");
    if (channels != 1 && channels != 3) throw ValidationError("unsupported channel count " + std::to_string(channels));
    if (data.size() != texel_count() * static_cast<std::size_t>(channels))
        throw ValidationError("texture data length does not match width*height*channels");
    if (!meta.channel_names.empty() && meta.channel_names.size() != static_cast<std::size_t>(channels))
        throw ValidationError("band metadata names " + std::to_string(meta.channel_names.size()) +
                              " channels, texture has " + std::to_string(channels));
    for (double x : data)
        if (!std::isfinite(x)) throw ValidationError("texture contains NaN or Inf");
}

bool same_shape(const Texture& a, const Texture& b) {
    return a.width == b.width && a.height == b.height && a.channels == b.channels;
}

} // namespace specmap::imaging
