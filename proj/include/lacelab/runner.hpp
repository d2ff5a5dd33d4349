#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lacelab {

inline constexpr const char* version_string = "0.1.0";

struct RunOptions {
    std::filesystem::path output_dir;  // overrides the config's output_dir when set
    std::filesystem::path cache_dir;   // empty: $LACELAB_CACHE_DIR, then <output_dir>/cache
    int threads = 0;                   // 0 keeps the current setting
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 2 invalid config, 1 any other failure
    std::string message;
    std::vector<std::string> files;
};

// One experiment from JSON text:
//   {"command": ..., "params": {...}, "seed": 1, "output_dir": "out"}
RunResult run_experiment(std::string_view config_text, const RunOptions& opt = {});
RunResult run_experiment_file(const std::filesystem::path& config, const RunOptions& opt = {});

}  // namespace lacelab
