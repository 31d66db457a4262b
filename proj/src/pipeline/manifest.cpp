#include "specmap/pipeline/manifest.hpp"

#include <algorithm>
#include <set>

#include "specmap/common/error.hpp"
#include "specmap/imaging/image_io.hpp"

namespace specmap::pipeline {
namespace {

class Reader {
public:
    Reader(const kv::Document& doc, const fs::path& file) : doc_(doc), file_(file) {}

    [[noreturn]] void fail(std::string_view section, std::string_view key, const std::string& what) const {
        std::string where = "manifest " + file_.string() + ": ";
        if (!section.empty()) where += "[" + std::string(section) + "] ";
        if (!key.empty()) where += std::string(key) + ": ";
        throw ValidationError(where + what);
    }

    const kv::Value& required(std::string_view section, std::string_view key) const {
        const kv::Value* v = doc_.get(section, key);
        if (!v) fail(section, key, "required key is missing");
        return *v;
    }

    std::string context(std::string_view section, std::string_view key) const {
        return "manifest " + file_.string() + ": [" + std::string(section) + "] " + std::string(key);
    }

    void only_keys(const kv::Section& s, std::initializer_list<std::string_view> allowed) const {
        for (const auto& [key, value] : s.entries) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(s.name, key, "unknown key");
        }
    }

    fs::path path(std::string_view section, std::string_view key) const {
        const fs::path p = required(section, key).as_string(context(section, key));
        if (p.empty()) fail(section, key, "empty path");
        return p.is_absolute() ? p : file_.parent_path() / p;
    }

    std::int32_t positive_int(std::string_view section, std::string_view key) const {
        const std::int64_t v = required(section, key).as_int(context(section, key));
        if (v < 1 || v > (1 << 16)) fail(section, key, "must be between 1 and 65536");
        return static_cast<std::int32_t>(v);
    }

    imaging::PatchRect patch(std::string_view section, std::string_view key) const {
        const auto& items = required(section, key).as_array(context(section, key));
        if (items.size() != 4) fail(section, key, "expected [col0, row0, col1, row1]");
        std::int64_t v[4];
        for (int i = 0; i < 4; ++i) v[i] = items[static_cast<std::size_t>(i)].as_int(context(section, key));
        return {static_cast<std::int32_t>(v[0]), static_cast<std::int32_t>(v[1]), static_cast<std::int32_t>(v[2]),
                static_cast<std::int32_t>(v[3])};
    }

private:
    const kv::Document& doc_;
    const fs::path& file_;
};

constexpr std::string_view kTexturePrefix = "texture.";

} // namespace

const TextureEntry& Manifest::vis() const {
    for (const auto& t : textures)
        if (t.modality == imaging::Modality::VIS && t.role == TextureRole::Acquired) return t;
    throw ValidationError("manifest has no acquired VIS texture");
}

const TextureEntry& Manifest::uvf() const {
    for (const auto& t : textures)
        if (t.modality == imaging::Modality::UVF && t.role == TextureRole::Acquired) return t;
    throw ValidationError("manifest has no acquired UVF texture");
}

std::vector<const TextureEntry*> Manifest::extra_bands() const {
    std::vector<const TextureEntry*> out;
    for (const auto& t : textures)
        if (t.role == TextureRole::Calibrated) out.push_back(&t);
    return out;
}

Manifest parse_manifest(std::string_view text, const fs::path& file) {
    kv::Document doc;
    try {
        doc = kv::parse(text);
    } catch (const ValidationError& e) {
        throw ValidationError("manifest " + file.string() + ": " + e.what());
    }
    const Reader r(doc, file);
    Manifest m;
    m.file = file;

    const std::set<std::string_view> known = {"project", "mesh", "atlas", "calibration", "classify", "provenance"};
    for (const auto& s : doc.sections) {
        if (s.name.empty()) r.fail("", s.entries.front().first, "keys must appear inside a section");
        if (!known.count(s.name) && s.name.rfind(kTexturePrefix, 0) != 0) r.fail(s.name, "", "unknown section");
    }

    if (const auto* s = doc.find("project")) r.only_keys(*s, {"name", "output_dir"});
    m.name = doc.get("project", "name") ? doc.get("project", "name")->as_string(r.context("project", "name")) : "";
    m.output_dir = doc.get("project", "output_dir") ? r.path("project", "output_dir") : file.parent_path() / "out";

    if (const auto* s = doc.find("mesh")) r.only_keys(*s, {"path", "v_flip"});
    m.mesh = r.path("mesh", "path");
    if (const auto* v = doc.get("mesh", "v_flip")) m.v_flip = v->as_bool(r.context("mesh", "v_flip"));

    if (const auto* s = doc.find("atlas")) r.only_keys(*s, {"width", "height"});
    m.atlas_width = r.positive_int("atlas", "width");
    m.atlas_height = r.positive_int("atlas", "height");

    for (const auto& s : doc.sections) {
        if (s.name.rfind(kTexturePrefix, 0) != 0) continue;
        r.only_keys(s, {"path", "modality", "role", "channels"});
        TextureEntry t;
        t.id = s.name.substr(kTexturePrefix.size());
        if (t.id.empty()) r.fail(s.name, "", "texture id is empty");
        t.path = r.path(s.name, "path");
        try {
            t.modality = imaging::modality_from_string(r.required(s.name, "modality").as_string(r.context(s.name, "modality")));
        } catch (const ValidationError& e) {
            r.fail(s.name, "modality", e.what());
        }
        const std::string role =
            s.find("role") ? s.find("role")->as_string(r.context(s.name, "role")) : std::string("acquired");
        if (role == "acquired") t.role = TextureRole::Acquired;
        else if (role == "calibrated") t.role = TextureRole::Calibrated;
        else r.fail(s.name, "role", "must be \"acquired\" or \"calibrated\", got \"" + role + "\"");
        if (const auto* v = s.find("channels")) {
            for (const auto& item : v->as_array(r.context(s.name, "channels")))
                t.channels.push_back(item.as_string(r.context(s.name, "channels")));
            if (t.channels.size() != 1 && t.channels.size() != 3) r.fail(s.name, "channels", "expected 1 or 3 names");
        }
        m.textures.push_back(std::move(t));
    }

    std::size_t vis = 0, uvf = 0;
    for (const auto& t : m.textures) {
        if (t.role != TextureRole::Acquired) continue;
        if (t.modality == imaging::Modality::VIS) ++vis;
        else if (t.modality == imaging::Modality::UVF) ++uvf;
        else r.fail("texture." + t.id, "role", "only VIS and UVF textures can be calibrated here; mark extra bands \"calibrated\"");
    }
    if (vis != 1) r.fail("", "", "expected exactly one acquired VIS texture, found " + std::to_string(vis));
    if (uvf != 1) r.fail("", "", "expected exactly one acquired UVF texture, found " + std::to_string(uvf));

    if (const auto* s = doc.find("calibration")) r.only_keys(*s, {"nominal_reflectance", "vis_patch", "uvf_patch"});
    if (const auto* v = doc.get("calibration", "nominal_reflectance")) {
        const auto ctx = r.context("calibration", "nominal_reflectance");
        m.nominal_reflectance = v->kind == kv::Value::Kind::Array ? v->as_doubles(ctx) : std::vector{v->as_double(ctx)};
        for (double x : m.nominal_reflectance)
            if (!(x > 0.0 && x <= 1.0)) r.fail("calibration", "nominal_reflectance", "values must lie in (0, 1]");
        if (m.nominal_reflectance.empty()) r.fail("calibration", "nominal_reflectance", "empty");
    } else {
        m.nominal_reflectance = {0.99};
    }
    m.vis_patch = r.patch("calibration", "vis_patch");
    m.uvf_patch = r.patch("calibration", "uvf_patch");
    for (const auto& [key, rect] : {std::pair{"vis_patch", m.vis_patch}, std::pair{"uvf_patch", m.uvf_patch}}) {
        try {
            imaging::check_patch(rect, m.atlas_width, m.atlas_height);
        } catch (const ValidationError& e) {
            r.fail("calibration", key, e.what());
        }
    }

    if (const auto* s = doc.find("classify")) r.only_keys(*s, {"theta_max", "radius", "min_face_fraction", "connected"});
    if (const auto* v = doc.get("classify", "theta_max")) m.theta_max = v->as_double(r.context("classify", "theta_max"));
    if (!(m.theta_max >= 0.0)) r.fail("classify", "theta_max", "must be non-negative");
    if (const auto* v = doc.get("classify", "radius")) {
        const std::int64_t radius = v->as_int(r.context("classify", "radius"));
        if (radius < 0 || radius > 1024) r.fail("classify", "radius", "must be between 0 and 1024");
        m.radius = static_cast<std::int32_t>(radius);
    }
    if (const auto* v = doc.get("classify", "min_face_fraction"))
        m.min_face_fraction = v->as_double(r.context("classify", "min_face_fraction"));
    if (!(m.min_face_fraction >= 0.0 && m.min_face_fraction <= 1.0))
        r.fail("classify", "min_face_fraction", "must lie in [0, 1]");
    if (const auto* v = doc.get("classify", "connected")) m.connected = v->as_bool(r.context("classify", "connected"));

    if (const auto* s = doc.find("provenance")) m.provenance = *s;
    m.provenance.name = "provenance";
    return m;
}

Manifest load_manifest(const fs::path& file) {
    std::string text;
    try {
        text = imaging::read_file(file);
    } catch (const std::exception& e) {
        throw ValidationError("cannot read manifest " + file.string() + ": " + e.what());
    }
    return parse_manifest(text, fs::absolute(file).lexically_normal());
}

void check_inputs_exist(const Manifest& m) {
    auto need = [&](const fs::path& p, const std::string& what) {
        std::error_code ec;
        if (!fs::is_regular_file(p, ec))
            throw ValidationError("manifest " + m.file.string() + ": " + what + " not found: " + p.string());
    };
    need(m.mesh, "mesh");
    for (const auto& t : m.textures) need(t.path, "texture '" + t.id + "'");
}

std::string to_text(const Manifest& m) {
    auto rel = [&](const fs::path& p) { return p.lexically_relative(m.file.parent_path()).generic_string(); };
    auto rect = [](const imaging::PatchRect& r) {
        return kv::Value::array({kv::Value::of(r.col0), kv::Value::of(r.row0), kv::Value::of(r.col1), kv::Value::of(r.row1)});
    };
    kv::Document doc;
    auto& project = doc.section("project");
    project.set("name", kv::Value::of(m.name));
    project.set("output_dir", kv::Value::of(rel(m.output_dir)));
    auto& mesh = doc.section("mesh");
    mesh.set("path", kv::Value::of(rel(m.mesh)));
    mesh.set("v_flip", kv::Value::of(m.v_flip));
    auto& atlas = doc.section("atlas");
    atlas.set("width", kv::Value::of(m.atlas_width));
    atlas.set("height", kv::Value::of(m.atlas_height));
    for (const auto& t : m.textures) {
        auto& s = doc.section("texture." + t.id);
        s.set("path", kv::Value::of(rel(t.path)));
        s.set("modality", kv::Value::of(std::string(imaging::to_string(t.modality))));
        s.set("role", kv::Value::of(t.role == TextureRole::Acquired ? "acquired" : "calibrated"));
        if (!t.channels.empty()) {
            std::vector<kv::Value> names;
            for (const auto& c : t.channels) names.push_back(kv::Value::of(c));
            s.set("channels", kv::Value::array(std::move(names)));
        }
    }
    auto& cal = doc.section("calibration");
    std::vector<kv::Value> nominal;
    for (double x : m.nominal_reflectance) nominal.push_back(kv::Value::of(x));
    cal.set("nominal_reflectance", kv::Value::array(std::move(nominal)));
    cal.set("vis_patch", rect(m.vis_patch));
    cal.set("uvf_patch", rect(m.uvf_patch));
    auto& cls = doc.section("classify");
    cls.set("theta_max", kv::Value::of(m.theta_max));
    cls.set("radius", kv::Value::of(m.radius));
    cls.set("min_face_fraction", kv::Value::of(m.min_face_fraction));
    cls.set("connected", kv::Value::of(m.connected));
    if (!m.provenance.entries.empty()) doc.sections.push_back(m.provenance);
    return kv::serialize(doc);
}

} // namespace specmap::pipeline
