#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace permuton::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Record of one CLI run: enough to redo it and to check the outputs.
struct RunManifest {
    std::string subcommand;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::optional<std::uint64_t> seed;
    double wall_time_seconds = 0.0;
    std::vector<std::string> outputs;

    nlohmann::ordered_json to_json() const;
    void write(const std::string& path) const;
};

}  // namespace permuton::cli
