#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rmk/boundary.hpp"
#include "rmk/evaluation.hpp"
#include "rmk/network.hpp"
#include "rmk/scene.hpp"

namespace rmk::config {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataConfig {
    std::uint64_t seed = 42;
    std::int64_t images = 4;
    std::int64_t height = 256;
    std::int64_t width = 256;
    scene::SceneSpec scene;  // scene.classes follows network.classes
};

enum class EvalMode { Network, Oracle, Empty };

struct EvalConfig {
    EvalMode mode = EvalMode::Network;
    eval::EvalOptions options;
    net::DecodeOptions decode;
};

struct AuditConfig {
    std::int64_t channels = 64;  // input, branch and output width of the audited module
};

struct GradcheckConfig {
    double eps = 1e-6;
    std::int64_t image_size = 64;
    /// Coordinates probed per op and block check; 0 probes all of them.
    std::int64_t max_coordinates = 0;
    std::int64_t assembly_coordinates = 1024;
};

struct Config {
    net::NetworkConfig network;
    DataConfig data;
    EvalConfig eval;
    AuditConfig audit;
    GradcheckConfig gradcheck;
    boundary::ExperimentConfig boundary;
    std::filesystem::path out_dir = "out";

    void validate() const;
};

/// INI text with [section] headers and key = value lines; whole lines
/// starting with ';' or '#' are comments. Unknown sections or keys, duplicates and malformed values throw
/// ConfigError naming the offending key.
Config parse(std::istream& is);
Config load(const std::filesystem::path& path);

/// The defaults, written in the same format.
void write_defaults(std::ostream& os);

const char* eval_mode_name(EvalMode m);

}  // namespace rmk::config
