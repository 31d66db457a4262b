// specmap command-line front end.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "specmap/common/error.hpp"
#include "specmap/pipeline/commands.hpp"
#include "specmap/pipeline/fixture.hpp"
#include "specmap/service/service.hpp"

namespace {

using namespace specmap;
namespace fs = std::filesystem;

struct Args {
    fs::path manifest;
    std::optional<fs::path> out;
    unsigned workers = 0;

    std::optional<double> theta_max;
    std::optional<std::int32_t> radius;
    std::vector<double> uv;
    std::vector<std::int32_t> texel;
    std::vector<double> ray;
    fs::path refs;
    bool connected = false;
    std::optional<double> min_face_fraction;

    std::string host = "127.0.0.1";
    int port = 8080;
    fs::path ui_dir;

    std::uint64_t seed = 20240501;
};

pipeline::CommandOptions options_of(const Args& a) {
    return {a.workers, a.out};
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_classify(const Args& a) {
    const auto m = pipeline::load_manifest(a.manifest);
    const int forms = static_cast<int>(!a.uv.empty()) + static_cast<int>(!a.texel.empty()) +
                      static_cast<int>(!a.ray.empty()) + static_cast<int>(!a.refs.empty());
    if (forms != 1) throw ValidationError("classify needs exactly one of --uv, --texel, --ray or --refs");

    pipeline::ClassifyParams params = pipeline::params_from(m);
    if (a.theta_max) params.theta_max = *a.theta_max;
    if (a.radius) params.radius = *a.radius;
    if (a.connected) params.connected = true;
    if (a.min_face_fraction) params.min_face_fraction = *a.min_face_fraction;
    params.workers = a.workers;

    pipeline::ClassifyReference ref;
    if (!a.uv.empty())
        ref = pipeline::Reference::at_uv({a.uv[0], a.uv[1]});
    else if (!a.texel.empty())
        ref = pipeline::Reference::at_texel({a.texel[0], a.texel[1]});
    else if (!a.ray.empty())
        ref = pipeline::Reference::along_ray({a.ray[0], a.ray[1], a.ray[2]}, {a.ray[3], a.ray[4], a.ray[5]});
    else
        ref = pipeline::ReferenceFile{a.refs};

    const fs::path run = pipeline::cmd_classify(m, ref, params, options_of(a));
    std::cout << read_text(run / pipeline::files::kStats);
    std::cerr << "classify: wrote " << run.string() << "\n";
    return 0;
}

int run_serve(const Args& a) {
    const auto m = pipeline::load_manifest(a.manifest);
    const fs::path out = pipeline::output_dir_for(m, options_of(a));

    // Signals are taken synchronously on this thread; the server runs on another.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    service::Service svc(m, out, {a.ui_dir, a.workers});
    const int port = svc.bind(a.host, a.port);
    svc.start_loading();
    spdlog::info("listening on http://{}:{}", a.host, port);

    std::thread server([&] { svc.run(); });
    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    svc.stop();
    server.join();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    // stdout carries command results; logs go to stderr.
    spdlog::set_default_logger(spdlog::stderr_color_mt("specmap"));
    CLI::App app{"specmap: spectral mapping on textured 3D models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SPECMAP_VERSION);
    Args a;

    auto manifest_opt = [&](CLI::App* c) {
        c->add_option("--manifest", a.manifest, "Project manifest")->required()->check(CLI::ExistingFile);
        c->add_option("--out", a.out, "Output directory (overrides the manifest)");
        c->add_option("--workers", a.workers, "Worker threads (0 = all cores)")->check(CLI::Range(0u, 1024u));
    };

    auto* calibrate = app.add_subcommand("calibrate", "Calibrate VIS and UVF textures against the reference patch");
    manifest_opt(calibrate);

    auto* build = app.add_subcommand("build-cube", "Rasterize occupancy and assemble the spectral cube");
    manifest_opt(build);

    auto* classify = app.add_subcommand("classify", "Spectral-angle classification from a reference");
    manifest_opt(classify);
    classify->add_option("--theta-max", a.theta_max, "Angular threshold in radians (default 0.15)")
        ->check(CLI::NonNegativeNumber);
    classify->add_option("--radius", a.radius, "Reference averaging radius in texels (default 0)")
        ->check(CLI::Range(0, 1024));
    auto* uv = classify->add_option("--uv", a.uv, "Reference uv coordinate")->expected(2);
    uv->type_name("U V");
    auto* texel = classify->add_option("--texel", a.texel, "Reference texel")->expected(2)->type_name("C R");
    auto* ray = classify->add_option("--ray", a.ray, "Reference ray: origin then direction")
                    ->expected(6)
                    ->type_name("OX OY OZ DX DY DZ");
    auto* refs = classify->add_option("--refs", a.refs, "Reference file, one `label v1..vB` per line")
                     ->check(CLI::ExistingFile);
    uv->excludes(texel)->excludes(ray)->excludes(refs);
    texel->excludes(ray)->excludes(refs);
    ray->excludes(refs);
    classify->add_flag("--connected", a.connected, "Keep only the component containing the reference");
    classify->add_option("--min-face-fraction", a.min_face_fraction, "Face selection threshold")
        ->check(CLI::Range(0.0, 1.0));

    auto* serve = app.add_subcommand("serve", "Serve the cube over HTTP");
    manifest_opt(serve);
    serve->add_option("--host", a.host, "Bind address");
    serve->add_option("--port", a.port, "Port (0 = any free port)")->check(CLI::Range(0, 65535));
    serve->add_option("--ui-dir", a.ui_dir, "Static viewer bundle served under /ui/")->check(CLI::ExistingDirectory);

    auto* fixture = app.add_subcommand("make-fixture", "Write the synthetic two-material fixture");
    fixture->add_option("--out", a.out, "Destination directory")->required();
    fixture->add_option("--seed", a.seed, "Noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*calibrate) {
            const auto run = pipeline::cmd_calibrate(pipeline::load_manifest(a.manifest), options_of(a));
            std::cout << run.string() << "\n";
        } else if (*build) {
            const auto run = pipeline::cmd_build_cube(pipeline::load_manifest(a.manifest), options_of(a));
            std::cout << run.string() << "\n";
        } else if (*classify) {
            return run_classify(a);
        } else if (*serve) {
            return run_serve(a);
        } else if (*fixture) {
            const auto info = pipeline::make_fixture(*a.out, a.seed);
            std::cout << info.manifest.string() << "\n";
        }
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
