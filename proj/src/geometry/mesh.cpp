#include "specmap/geometry/mesh.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "specmap/common/error.hpp"

namespace specmap::geometry {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
    throw ValidationError("malformed mesh file, line " + std::to_string(line_no) + ": " + what);
}

double parse_real(std::string_view tok, std::size_t line_no) {
    double value = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) malformed(line_no, "bad number '" + std::string(tok) + "'");
    if (!std::isfinite(value)) malformed(line_no, "non-finite number '" + std::string(tok) + "'");
    return value;
}

long long parse_index(std::string_view tok, std::size_t line_no) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || value == 0)
        malformed(line_no, "bad index '" + std::string(tok) + "'");
    return value;
}

// OBJ indices are 1-based; negative values count back from the latest record.
std::uint32_t resolve(long long idx, std::size_t count, std::size_t line_no, const char* kind) {
    const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(count) + idx;
    if (resolved < 0 || resolved >= static_cast<long long>(count)) {
        malformed(line_no, std::string(kind) + " index " + std::to_string(idx) + " out of range (have " +
                               std::to_string(count) + ")");
    }
    return static_cast<std::uint32_t>(resolved);
}

struct Corner {
    std::uint32_t vertex;
    std::uint32_t texcoord;
};

} // namespace

LoadedMesh parse_obj(std::string_view text) {
    LoadedMesh out;
    std::vector<UV> texcoords;
    std::vector<std::size_t> polygon_lines;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    // Face records may precede later vertex records only with negative
    // indices; positive indices are validated once the whole file is read.
    std::vector<std::vector<std::pair<long long, long long>>> raw_faces;
    std::vector<std::pair<std::size_t, std::size_t>> counts_at_face;

    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;

        if (tok[0] == "v") {
            if (tok.size() < 4) malformed(line_no, "vertex needs 3 coordinates");
            out.mesh.vertices.push_back(
                {parse_real(tok[1], line_no), parse_real(tok[2], line_no), parse_real(tok[3], line_no)});
        } else if (tok[0] == "vt") {
            if (tok.size() < 2) malformed(line_no, "texture coordinate needs at least u");
            UV uv{parse_real(tok[1], line_no), tok.size() > 2 ? parse_real(tok[2], line_no) : 0.0};
            for (double* c : {&uv.u, &uv.v}) {
                if (*c < 0.0 || *c > 1.0) {
                    *c = *c < 0.0 ? 0.0 : 1.0;
                    ++out.report.clamped_uv_components;
                }
            }
            texcoords.push_back(uv);
        } else if (tok[0] == "f") {
            if (tok.size() < 4) malformed(line_no, "face needs at least 3 corners");
            std::vector<std::pair<long long, long long>> corners;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                const auto slash = tok[i].find('/');
                if (slash == std::string_view::npos) {
                    throw ValidationError("mesh has no uv coordinates (face on line " + std::to_string(line_no) +
                                          " lacks a texture index)");
                }
                const auto vpart = tok[i].substr(0, slash);
                auto rest = tok[i].substr(slash + 1);
                const auto slash2 = rest.find('/');
                const auto tpart = slash2 == std::string_view::npos ? rest : rest.substr(0, slash2);
                if (tpart.empty()) {
                    throw ValidationError("mesh has no uv coordinates (face on line " + std::to_string(line_no) +
                                          " lacks a texture index)");
                }
                corners.emplace_back(parse_index(vpart, line_no), parse_index(tpart, line_no));
            }
            raw_faces.push_back(std::move(corners));
            counts_at_face.emplace_back(out.mesh.vertices.size(), texcoords.size());
            polygon_lines.push_back(line_no);
        }
        // vn, o, g, s, usemtl, mtllib and unknown records are ignored.
    }

    for (std::size_t f = 0; f < raw_faces.size(); ++f) {
        std::vector<Corner> poly;
        for (const auto& [vi, ti] : raw_faces[f]) {
            const std::size_t vcount = vi < 0 ? counts_at_face[f].first : out.mesh.vertices.size();
            const std::size_t tcount = ti < 0 ? counts_at_face[f].second : texcoords.size();
            poly.push_back({resolve(vi, vcount, polygon_lines[f], "vertex"),
                            resolve(ti, tcount, polygon_lines[f], "texture")});
        }
        if (poly.size() > 3) ++out.report.fan_triangulated_polygons;
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
            const Corner c0 = poly[0], c1 = poly[k], c2 = poly[k + 1];
            if (c0.vertex == c1.vertex && c1.vertex == c2.vertex) {
                ++out.report.dropped_degenerate_faces;
                continue;
            }
            out.mesh.faces.push_back({c0.vertex, c1.vertex, c2.vertex});
            out.mesh.uv_corners.push_back({texcoords[c0.texcoord], texcoords[c1.texcoord], texcoords[c2.texcoord]});
        }
    }
    return out;
}

LoadedMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open mesh file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_obj(buf.str());
}

std::string to_obj(const Mesh& mesh) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& v : mesh.vertices) os << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    for (const auto& corners : mesh.uv_corners)
        for (const auto& uv : corners) os << "vt " << uv.u << ' ' << uv.v << '\n';
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        os << 'f';
        for (std::size_t k = 0; k < 3; ++k) os << ' ' << mesh.faces[f][k] + 1 << '/' << 3 * f + k + 1;
        os << '\n';
    }
    return os.str();
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write mesh file: " + path.string());
    out << to_obj(mesh);
    if (!out) throw RuntimeError("failed writing mesh file: " + path.string());
}

} // namespace specmap::geometry
