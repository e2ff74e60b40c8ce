#pragma once
// Stage-by-stage pipeline over an output directory. Each command reads the
// artifacts of its upstream commands, writes its own atomically and records
// hashes in manifest.json so unchanged reruns are skipped.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wikinav {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
    std::filesystem::path edges;
    std::filesystem::path clickstream;
    std::filesystem::path features;   // optional precomputed feature file
    std::filesystem::path tokens;     // optional corpus: name<TAB>text...
    std::filesystem::path categories; // optional corpus: name<TAB>category...
    std::filesystem::path out = "wikinav-out";

    std::uint64_t threshold = 10;
    std::vector<double> alphas{0.80, 0.85, 0.90};
    std::vector<double> kappas; // empty: {1..5} x mean out-degree
    std::size_t projection_dim = 512;
    std::uint64_t projection_seed = 42;
    std::size_t sample_size = 10000;
    std::uint64_t sample_seed = 1;
    bool restrict_to_viewed = false;
    bool fail_fast = false;
    bool recompute_network_features = false;
    unsigned threads = 1;
};

// Reads a JSON config. Relative paths are resolved against the file's directory.
// Unknown keys and wrong types are collected and thrown together as ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

// Every problem with the config for the given command (empty when valid).
std::vector<std::string> validate(const RunConfig& cfg, const std::string& command);

// Hash of the analysis parameters (not paths, output dir or thread count).
std::string config_hash(const RunConfig& cfg);

const std::vector<std::string>& pipeline_commands();

struct CommandResult {
    std::string command;
    bool cache_hit = false;
    std::vector<std::filesystem::path> outputs;
    std::vector<std::string> notes;
};

// Runs one command. Throws ConfigError for an invalid config and
// DependencyError naming the producing command when an upstream artifact is
// missing.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

// SHA-256 of a file as lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

} // namespace wikinav
