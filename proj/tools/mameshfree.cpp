#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <mameshfree/mameshfree.hpp>

namespace {

void usage(std::ostream& os) {
    os << "usage: mameshfree <config.run> [--threads N] [--print-config]\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::string config_path;
    bool print_only = false;
    int threads = 0;  // 0 = all cores

    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--print-config") {
            print_only = true;
        } else if (arg == "--threads") {
            if (i + 1 >= argc) {
                std::cerr << "--threads needs a value\n";
                return 2;
            }
            threads = std::atoi(argv[++i]);
            if (threads < 1) {
                std::cerr << "--threads must be a positive integer\n";
                return 2;
            }
        } else if (arg == "--help" || arg == "-h") {
            usage(std::cout);
            return 0;
        } else if (!arg.empty() && arg[0] == '-') {
            std::cerr << "unknown flag: " << arg << '\n';
            usage(std::cerr);
            return 2;
        } else if (config_path.empty()) {
            config_path = arg;
        } else {
            std::cerr << "unexpected argument: " << arg << '\n';
            usage(std::cerr);
            return 2;
        }
    }
    if (config_path.empty()) {
        usage(std::cerr);
        return 2;
    }
    if (!std::filesystem::exists(config_path)) {
        std::cerr << "config not found: " << config_path << '\n';
        return 2;
    }

    mameshfree::RunConfig cfg;
    try {
        cfg = mameshfree::parse_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (print_only) {
        mameshfree::print_config(std::cout, cfg);
        return 0;
    }
    if (threads > 0) mameshfree::set_thread_count(threads);
    return mameshfree::run_command(cfg, std::cout);
}
