#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthpca/errors.hpp"

namespace depthpca {

inline constexpr const char* kVersion = "0.1.0";

// JSON metadata written next to every command's CSV payloads. The timestamp
// and wall time are the only fields that vary between identical runs.
struct Report {
    std::string command;
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> payload_files;
    double wall_time_s = 0.0;

    void write(const std::filesystem::path& dir) const {
        nlohmann::json j;
        j["command"] = command;
        j["version"] = kVersion;
        j["seed"] = seed;
        j["config"] = config;
        j["summary"] = summary;
        j["payload_files"] = payload_files;
        j["wall_time_s"] = wall_time_s;
        j["timestamp"] = iso_now();
        std::ofstream out(dir / "report.json");
        if (!out) throw IoError("cannot write report.json in '" + dir.string() + "'");
        out << j.dump(2) << '\n';
    }

private:
    static std::string iso_now() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }
};

class WallClock {
public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace depthpca
