#pragma once
// Run manifest: a JSON sidecar emitted next to every command's data files.
// It records the full parameter set actually used (defaults included), the
// master seed and every derived per-run seed, the code version, wall-clock
// and elapsed time, warnings, and the list of files written. Together with
// the same build it reproduces every output bit-exactly; all wall-clock
// information lives here and never inside the data files.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sshbell/common.hpp"

namespace sshbell {

inline constexpr const char* version_string = "sshbell 0.1.0";

struct RunManifest {
    std::string command;
    std::uint64_t master_seed = 0;
    int workers = 1;
    std::map<std::string, std::string> parameters;  // key -> value as used
    std::vector<std::pair<std::string, std::uint64_t>> derived_seeds;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
    double elapsed_seconds = 0.0;

    void write(const std::string& path) const {
        nlohmann::json j;
        j["command"] = command;
        j["version"] = version_string;
        j["master_seed"] = master_seed;
        j["workers"] = workers;
        j["started_at_utc"] = now_utc();
        j["elapsed_seconds"] = elapsed_seconds;
        j["parameters"] = parameters;
        nlohmann::json seeds = nlohmann::json::object();
        for (const auto& [label, seed] : derived_seeds) seeds[label] = seed;
        j["derived_seeds"] = seeds;
        j["warnings"] = warnings;
        j["outputs"] = outputs;
        std::ofstream out(path);
        if (!out) throw config_error("cannot open for writing: " + path);
        out << j.dump(2) << '\n';
        if (!out) throw config_error("manifest write failed");
    }

private:
    static std::string now_utc() {
        const std::time_t t =
            std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }
};

}  // namespace sshbell
