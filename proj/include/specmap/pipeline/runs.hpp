#pragma once

#include <filesystem>
#include <string>

namespace specmap::pipeline {

namespace fs = std::filesystem;

/// Exclusive lock on an output directory, held for the lifetime of the object.
/// A second holder gets a RuntimeError naming the lock file.
class OutputLock {
public:
    explicit OutputLock(const fs::path& output_dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

/// A run directory under <output_dir>/<stage>/. Files are written into a
/// hidden staging directory; commit() renames it to a UTC time stamp (with a
/// numeric suffix if taken) and repoints <stage>/latest. Without commit() the
/// staging directory is removed.
class RunDir {
public:
    RunDir(const fs::path& output_dir, std::string stage);
    ~RunDir();
    RunDir(const RunDir&) = delete;
    RunDir& operator=(const RunDir&) = delete;

    const fs::path& path() const { return staging_; }
    fs::path commit();

private:
    fs::path stage_dir_;
    fs::path staging_;
    bool committed_ = false;
};

/// <output_dir>/<stage>/latest resolved to a run directory. Throws
/// ValidationError with `hint` when the stage has not produced output yet.
fs::path latest_run(const fs::path& output_dir, const std::string& stage, const std::string& hint);

/// UTC time as e.g. 20240131T235959Z.
std::string utc_stamp();

} // namespace specmap::pipeline
