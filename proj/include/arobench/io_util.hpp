#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arobench {

/// Fixed decimal serialization for feature values: 9 significant digits.
/// Parsing such text back and re-printing it is the identity, which is what
/// the CSV round-trip guarantees rely on.
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Parses a decimal value; the whole token must be consumed.
inline bool parse_value(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

/// The value a double becomes after a serialize/parse round trip.
inline double quantize_value(double v) {
    double out = 0;
    parse_value(format_value(v), out);
    return out;
}

namespace detail {
inline std::atomic<unsigned>& tmp_counter() {
    static std::atomic<unsigned> counter{0};
    return counter;
}
} // namespace detail

/// Writes a file via a temporary in the same directory plus an atomic
/// rename, so a failed run never leaves a partially written file behind.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    if (fs::is_directory(path))
        throw std::runtime_error("target is a directory: " + path.string());
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(detail::tmp_counter()++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

/// Stages every file, then commits all renames. A failure while staging
/// removes the staged temporaries and leaves none of the targets in place.
inline void atomic_write_files(
    const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
    namespace fs = std::filesystem;
    std::vector<std::pair<fs::path, fs::path>> staged;
    staged.reserve(files.size());
    try {
        for (const auto& [path, contents] : files) {
            const fs::path dir = path.parent_path();
            if (!dir.empty()) fs::create_directories(dir);
            if (fs::is_directory(path))
                throw std::runtime_error("target is a directory: " + path.string());
            fs::path tmp = path;
            tmp += ".tmp" + std::to_string(detail::tmp_counter()++);
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
            out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
            out.flush();
            if (!out) throw std::runtime_error("write failed: " + tmp.string());
            staged.emplace_back(tmp, path);
        }
    } catch (...) {
        for (const auto& [tmp, target] : staged) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
        throw;
    }
    for (const auto& [tmp, target] : staged) fs::rename(tmp, target);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    return contents;
}

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Verbosity comes from the ARO_BENCH_LOG environment variable
/// ("info" or "debug"; anything else is quiet).
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* v = std::getenv("ARO_BENCH_LOG");
        if (v == nullptr) return LogLevel::Quiet;
        if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
        if (std::strcmp(v, "info") == 0) return LogLevel::Info;
        return LogLevel::Quiet;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[arobench] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[arobench] " << msg << "\n";
}

} // namespace arobench
