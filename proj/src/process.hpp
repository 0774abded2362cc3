#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace splitcodec::detail {

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::optional<int> signal;
    std::string stderr_text;
    bool stderr_truncated = false;
};

/// PATH lookup for argv[0]; nullopt when nothing executable matches.
[[nodiscard]] std::optional<std::filesystem::path> find_program(const std::string& program);

/// Runs `argv` with stdin and stdout on /dev/null, capturing at most
/// `stderr_cap` bytes of standard error. The child is killed at `timeout`.
[[nodiscard]] ProcessResult run_process(const std::filesystem::path& program, const std::vector<std::string>& argv,
                                        std::chrono::milliseconds timeout, std::size_t stderr_cap);

} // namespace splitcodec::detail
