#include "specmap/pipeline/runs.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>

#include "specmap/common/error.hpp"

namespace specmap::pipeline {

OutputLock::OutputLock(const fs::path& output_dir) : path_(output_dir / ".specmap.lock") {
    fs::create_directories(output_dir);
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        if (errno == EEXIST) {
            throw RuntimeError("output directory is in use by another run (lock file " + path_.string() +
                               "; remove it if no other run is active)");
        }
        throw RuntimeError("cannot create lock file " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd_, pid.data(), pid.size());
}

OutputLock::~OutputLock() {
    if (fd_ >= 0) ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
}

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

RunDir::RunDir(const fs::path& output_dir, std::string stage) : stage_dir_(output_dir / stage) {
    fs::create_directories(stage_dir_);
    staging_ = stage_dir_ / (".partial-" + std::to_string(::getpid()));
    fs::remove_all(staging_);
    fs::create_directory(staging_);
}

RunDir::~RunDir() {
    if (committed_) return;
    std::error_code ec;
    fs::remove_all(staging_, ec);
}

fs::path RunDir::commit() {
    const std::string stamp = utc_stamp();
    fs::path final_dir = stage_dir_ / stamp;
    for (int n = 2; fs::exists(final_dir); ++n) final_dir = stage_dir_ / (stamp + "-" + std::to_string(n));
    fs::rename(staging_, final_dir);
    committed_ = true;

    // Swap the symlink atomically so readers never see a missing `latest`.
    const fs::path tmp = stage_dir_ / (".latest-" + std::to_string(::getpid()));
    fs::remove(tmp);
    fs::create_directory_symlink(final_dir.filename(), tmp);
    fs::rename(tmp, stage_dir_ / "latest");
    return final_dir;
}

fs::path latest_run(const fs::path& output_dir, const std::string& stage, const std::string& hint) {
    const fs::path link = output_dir / stage / "latest";
    std::error_code ec;
    if (!fs::is_directory(link, ec)) throw ValidationError("no " + stage + " output in " + output_dir.string() + "; " + hint);
    return fs::canonical(link);
}

} // namespace specmap::pipeline
