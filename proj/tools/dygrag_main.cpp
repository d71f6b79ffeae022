#include "dygrag/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("dygrag"));
    std::vector<std::string> args(argv + 1, argv + argc);
    return dygrag::run_cli(args, std::cout, std::cerr);
}
