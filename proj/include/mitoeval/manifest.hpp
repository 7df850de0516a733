#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "mitoeval/io.hpp"
#include "mitoeval/random.hpp"

namespace mitoeval {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string fnv1a64_hex(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

// Reproducibility sidecar written next to every output file. The timestamp
// documents the run; everything else is a pure function of inputs and flags,
// so identical invocations produce identical data files.
struct RunManifest {
    std::string subcommand;
    json config = json::object();
    std::map<std::string, std::string> input_digests;  // path -> digest
    std::map<std::string, std::string> output_digests; // path -> digest
    std::optional<std::uint64_t> seed;

    void add_input(const std::string& path) { input_digests[path] = fnv1a64_hex(read_file(path)); }

    void write_output(const std::string& path, const std::string& content) {
        write_file(path, content);
        output_digests[path] = fnv1a64_hex(content);
    }

    std::string serialize() const {
        char stamp[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

        json out;
        out["subcommand"] = subcommand;
        out["tool_version"] = kToolVersion;
        out["config"] = config;
        out["inputs"] = input_digests;
        out["outputs"] = output_digests;
        if (seed) out["seed"] = *seed;
        out["timestamp"] = stamp;
        return out.dump(2) + "\n";
    }

    // Written alongside the primary output as <out>.manifest.json.
    void save(const std::string& primary_out_path) const {
        write_file(primary_out_path + ".manifest.json", serialize());
    }
};

} // namespace mitoeval
