#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "specmap/pipeline/workspace.hpp"

namespace httplib {
class Server;
}

namespace specmap::service {

namespace fs = std::filesystem;

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

/// Min-max tone mapping per channel over valid texels to an 8-bit PNG;
/// masked texels are black. Bands are selected by index from the cube.
struct TonemapResult {
    std::string png;
    std::vector<double> min, max;
};
TonemapResult tonemap_bands(const cube::SpectralCube& cube, const std::vector<std::size_t>& bands);

struct ServiceConfig {
    fs::path ui_dir;        // static viewer bundle served under /ui (optional)
    unsigned workers = 0;   // per-request classification threads; 0 = all
};

/// HTTP front end over a built cube. Construction checks that a cube exists
/// (ValidationError naming build-cube otherwise); the cube itself is loaded by
/// load() or in the background by start_loading(), and every data endpoint
/// answers 503 until it is ready. The workspace is never modified after
/// loading, so handlers may run concurrently.
class Service {
public:
    Service(pipeline::Manifest manifest, fs::path output_dir, ServiceConfig config = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void load();
    void start_loading();
    bool ready() const { return ready_.load(); }

    // Endpoint handlers, usable without a socket.
    Response health() const;
    Response mesh() const;
    Response texture(const std::string& name) const;
    Response classify(std::string_view request_body) const;

    /// Binds the listening socket (port 0 = any free port) and returns the
    /// bound port. Throws RuntimeError when the port is taken.
    int bind(const std::string& host, int port);
    /// Serves until stop(); blocking.
    void run();
    void stop();

private:
    void register_routes();

    pipeline::Manifest manifest_;
    fs::path output_dir_;
    ServiceConfig config_;

    std::atomic<bool> ready_{false};
    mutable std::mutex error_mutex_;
    std::string load_error_;
    std::thread loader_;

    std::unique_ptr<pipeline::Workspace> workspace_;
    TonemapResult vis_preview_, uvf_preview_;

    std::unique_ptr<httplib::Server> server_;
};

} // namespace specmap::service
