#include "specmap/service/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <algorithm>
#include <climits>
#include <cmath>

#include "specmap/common/error.hpp"
#include "specmap/common/parallel.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/pipeline/commands.hpp"
#include "specmap/pipeline/report.hpp"
#include "specmap/pipeline/runs.hpp"
#include "specmap/service/rle.hpp"

#ifndef SPECMAP_VERSION
#define SPECMAP_VERSION "0.0.0"
#endif

namespace specmap::service {
namespace {

using nlohmann::json;

Response json_response(int status, const json& body) {
    return {status, "application/json", body.dump(), {}};
}

Response error_response(int status, const std::string& message) {
    return json_response(status, {{"error", message}});
}

Response not_ready() {
    return error_response(503, "cube is still loading");
}

class BadRequest : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

double number(const json& j, const char* what) {
    if (!j.is_number()) throw BadRequest(std::string(what) + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw BadRequest(std::string(what) + " must be finite");
    return v;
}

std::vector<double> numbers(const json& j, std::size_t n, const char* what) {
    if (!j.is_array() || j.size() != n)
        throw BadRequest(std::string(what) + " must be an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, what));
    return out;
}

std::int64_t integer(const json& j, const char* what) {
    if (!j.is_number_integer()) throw BadRequest(std::string(what) + " must be an integer");
    return j.get<std::int64_t>();
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += json(v[i]).dump();
    }
    return out;
}

void apply(const Response& r, httplib::Response& res) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
}

} // namespace

TonemapResult tonemap_bands(const cube::SpectralCube& cube, const std::vector<std::size_t>& bands) {
    if (bands.size() != 1 && bands.size() != 3) throw ValidationError("preview needs 1 or 3 bands");
    const std::size_t b = cube.band_count();
    const auto samples = cube.samples();
    const auto& valid = cube.valid_mask().data;
    TonemapResult out;
    out.min.assign(bands.size(), 0.0);
    out.max.assign(bands.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid[i]) continue;
        for (std::size_t c = 0; c < bands.size(); ++c) {
            const double v = samples[i * b + bands[c]];
            if (!any || v < out.min[c]) out.min[c] = v;
            if (!any || v > out.max[c]) out.max[c] = v;
        }
        any = true;
    }
    std::vector<std::uint8_t> pixels(valid.size() * bands.size(), 0);
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid[i]) continue;
        for (std::size_t c = 0; c < bands.size(); ++c) {
            const double span = out.max[c] - out.min[c];
            const double x = span > 0.0 ? (samples[i * b + bands[c]] - out.min[c]) / span : 0.0;
            pixels[i * bands.size() + c] = static_cast<std::uint8_t>(std::lround(x * 255.0));
        }
    }
    out.png = imaging::encode_png8(cube.width(), cube.height(), static_cast<std::int32_t>(bands.size()), pixels);
    return out;
}

Service::Service(pipeline::Manifest manifest, fs::path output_dir, ServiceConfig config)
    : manifest_(std::move(manifest)), output_dir_(std::move(output_dir)), config_(std::move(config)) {
    pipeline::require_cube(output_dir_);
    if (!config_.ui_dir.empty() && !fs::is_directory(config_.ui_dir))
        throw ValidationError("ui directory not found: " + config_.ui_dir.string());
}

Service::~Service() {
    stop();
    if (loader_.joinable()) loader_.join();
}

void Service::load() {
    auto ws = std::make_unique<pipeline::Workspace>(pipeline::open_workspace(manifest_, output_dir_));
    std::vector<std::size_t> vis, uvf;
    for (std::size_t k = 0; k < ws->cube.band_count(); ++k) {
        const auto m = ws->cube.bands()[k].modality;
        if (m == imaging::Modality::VIS) vis.push_back(k);
        if (m == imaging::Modality::UVF) uvf.push_back(k);
    }
    if (vis.size() == 1 || vis.size() == 3) vis_preview_ = tonemap_bands(ws->cube, vis);
    if (uvf.size() == 1 || uvf.size() == 3) uvf_preview_ = tonemap_bands(ws->cube, uvf);
    workspace_ = std::move(ws);
    ready_.store(true);
}

void Service::start_loading() {
    loader_ = std::thread([this] {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            load();
            const auto ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
            spdlog::info("cube loaded from {} in {} ms", workspace_->cube_run.string(), ms);
        } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex_);
            load_error_ = e.what();
            spdlog::error("cube load failed: {}", e.what());
        }
    });
}

Response Service::health() const {
    if (ready()) return json_response(200, {{"status", "ok"}, {"version", SPECMAP_VERSION}});
    std::lock_guard lock(error_mutex_);
    if (!load_error_.empty()) return json_response(503, {{"status", "error"}, {"error", load_error_}});
    return json_response(503, {{"status", "loading"}, {"version", SPECMAP_VERSION}});
}

Response Service::mesh() const {
    if (!ready()) return not_ready();
    return {200, "text/plain", workspace_->mesh_bytes, {}};
}

Response Service::texture(const std::string& name) const {
    if (name != "vis_calib" && name != "uvf_calib" && name != "overlay")
        return error_response(404, "unknown texture '" + name + "'");
    if (!ready()) return not_ready();
    if (name == "overlay") {
        try {
            const fs::path run = pipeline::latest_run(output_dir_, pipeline::kClassifyStage, "run classify first");
            return {200, "image/png", imaging::read_file(run / pipeline::files::kOverlay), {}};
        } catch (const std::exception& e) {
            return error_response(404, e.what());
        }
    }
    const TonemapResult& p = name == "vis_calib" ? vis_preview_ : uvf_preview_;
    if (p.png.empty()) return error_response(404, "texture '" + name + "' is not part of the cube");
    return {200,
            "image/png",
            p.png,
            {{"X-Tonemap", "linear min-max per channel over valid texels"},
             {"X-Tonemap-Min", join(p.min)},
             {"X-Tonemap-Max", join(p.max)}}};
}

Response Service::classify(std::string_view request_body) const {
    if (!ready()) return not_ready();
    pipeline::Reference ref;
    pipeline::ClassifyParams params = pipeline::params_from(manifest_);
    params.workers = resolve_workers(config_.workers);
    try {
        const json req = json::parse(request_body);
        if (!req.is_object()) throw BadRequest("request must be a JSON object");
        for (const auto& [key, value] : req.items()) {
            static const std::vector<std::string> allowed = {"uv",     "texel",     "ray",
                                                             "theta_max", "radius", "connected",
                                                             "min_face_fraction"};
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw BadRequest("unknown field '" + key + "'");
        }
        const int forms = static_cast<int>(req.contains("uv")) + static_cast<int>(req.contains("texel")) +
                          static_cast<int>(req.contains("ray"));
        if (forms != 1) throw BadRequest("exactly one of uv, texel or ray is required");
        if (req.contains("uv")) {
            const auto uv = numbers(req["uv"], 2, "uv");
            ref = pipeline::Reference::at_uv({uv[0], uv[1]});
        } else if (req.contains("texel")) {
            const auto& t = req["texel"];
            if (!t.is_array() || t.size() != 2) throw BadRequest("texel must be [col, row]");
            const auto col = integer(t[0], "texel"), row = integer(t[1], "texel");
            if (col < INT32_MIN || col > INT32_MAX || row < INT32_MIN || row > INT32_MAX)
                throw BadRequest("texel out of range");
            ref = pipeline::Reference::at_texel({static_cast<std::int32_t>(col), static_cast<std::int32_t>(row)});
        } else {
            const auto& r = req["ray"];
            if (!r.is_object() || !r.contains("origin") || !r.contains("direction"))
                throw BadRequest("ray must have origin and direction");
            const auto o = numbers(r["origin"], 3, "ray.origin");
            const auto d = numbers(r["direction"], 3, "ray.direction");
            ref = pipeline::Reference::along_ray({o[0], o[1], o[2]}, {d[0], d[1], d[2]});
        }
        if (req.contains("theta_max")) params.theta_max = number(req["theta_max"], "theta_max");
        if (params.theta_max < 0.0) throw BadRequest("theta_max must be non-negative");
        if (req.contains("radius")) {
            const auto radius = integer(req["radius"], "radius");
            if (radius < 0 || radius > 1024) throw BadRequest("radius must be between 0 and 1024");
            params.radius = static_cast<std::int32_t>(radius);
        }
        if (req.contains("connected")) {
            if (!req["connected"].is_boolean()) throw BadRequest("connected must be a boolean");
            params.connected = req["connected"].get<bool>();
        }
        if (req.contains("min_face_fraction")) params.min_face_fraction = number(req["min_face_fraction"], "min_face_fraction");
    } catch (const json::exception& e) {
        return error_response(422, std::string("invalid JSON: ") + e.what());
    } catch (const BadRequest& e) {
        return error_response(422, e.what());
    }

    try {
        const auto result = pipeline::classify_single(*workspace_, ref, params);
        json body = pipeline::describe(result, params);
        body["width"] = result.region.width;
        body["height"] = result.region.height;
        body["mask"] = {{"encoding", "rle-rows"}, {"rows", encode_rle_rows(result.region)}};
        return json_response(200, body);
    } catch (const pipeline::NoSurfaceHit& e) {
        return json_response(409, {{"error", e.what()}, {"reason", "no surface hit"}});
    } catch (const classify::MaskedTexelError& e) {
        return json_response(409, {{"error", e.what()}, {"reason", "reference texel not on surface"}});
    } catch (const ValidationError& e) {
        return error_response(422, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

void Service::register_routes() {
    auto& s = *server_;
    s.Get("/health", [this](const httplib::Request&, httplib::Response& res) { apply(health(), res); });
    s.Get("/mesh", [this](const httplib::Request&, httplib::Response& res) { apply(mesh(), res); });
    s.Get(R"(/texture/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        apply(texture(req.matches[1]), res);
    });
    s.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) { apply(classify(req.body), res); });
    if (!config_.ui_dir.empty()) {
        s.set_mount_point("/ui", config_.ui_dir.string());
        s.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/index.html"); });
    }
    s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) res.set_content(json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
    });
    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(json{{"error", what}}.dump(), "application/json");
    });
    s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::info("{} {} {} {}B", req.method, req.path, res.status, res.body.size());
    });
}

int Service::bind(const std::string& host, int port) {
    server_ = std::make_unique<httplib::Server>();
    // The library default adds SO_REUSEPORT, which lets a second server share a busy port.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    register_routes();
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        server_.reset();
        throw RuntimeError("cannot listen on " + host + ":" + std::to_string(port) + " (port in use?)");
    }
    return bound;
}

void Service::run() {
    if (!server_) throw RuntimeError("service is not bound to a port");
    server_->listen_after_bind();
}

void Service::stop() {
    if (server_) server_->stop();
}

} // namespace specmap::service
