#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lacelab/lacelab.h"

int main(int argc, char** argv) {
    CLI::App app{"Lattice Green's functions, lace-expansion diagrams and bootstrap checks"};
    std::string config, output, cache;
    int threads = 0;
    app.add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--threads", threads, "Worker threads (0: hardware default)")->check(CLI::NonNegativeNumber);
    app.add_option("--cache-dir", cache, "SAW enumeration cache (default: $LACELAB_CACHE_DIR, then <output>/cache)");
    app.add_option("--output", output, "Output directory, overrides output_dir in the config");
    app.set_version_flag("--version", lacelab_version());
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    int rc = lacelab_run_config(config.c_str(), output.empty() ? nullptr : output.c_str(),
                                cache.empty() ? nullptr : cache.c_str(), threads);
    if (rc != 0) std::fprintf(stderr, "lacelab: %s\n", lacelab_last_error());
    return rc;
}
