#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qdent/cli/config.hpp"

namespace qdent::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 1;
inline constexpr int numerical = 2;
inline constexpr int acceptance = 3;
}  // namespace exit_code

enum class OutputFormat { Csv, Report };

struct CommandContext {
    ScenarioConfig config;
    std::uint64_t seed = 12345;
    OutputFormat format = OutputFormat::Report;
    double gate_tolerance = 1e-10;
};

struct CommandOutput {
    int exit_code = exit_code::ok;
    /// (file name, contents), written together once the command has finished.
    std::vector<std::pair<std::string, std::string>> files;
    std::string console;
};

CommandOutput cmd_fig3(const CommandContext& context);
CommandOutput cmd_fig4(const CommandContext& context);
CommandOutput cmd_transfer_scan(const CommandContext& context);
CommandOutput cmd_distribute(const CommandContext& context);
CommandOutput cmd_gates_check(const CommandContext& context);

/// Writes each file through a temporary name and a rename.
void write_files_atomically(const std::filesystem::path& out_dir,
                            const std::vector<std::pair<std::string, std::string>>& files);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qdent::cli
