#include "process.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "splitcodec/error.hpp"

extern char** environ;

namespace splitcodec::detail {

namespace {

bool is_executable(const std::filesystem::path& path)
{
    std::error_code ec;
    return std::filesystem::is_regular_file(path, ec) && ::access(path.c_str(), X_OK) == 0;
}

class FileDescriptor {
public:
    explicit FileDescriptor(int fd = -1) noexcept : fd_(fd) {}
    ~FileDescriptor() { reset(); }
    FileDescriptor(const FileDescriptor&) = delete;
    FileDescriptor& operator=(const FileDescriptor&) = delete;

    [[nodiscard]] int get() const noexcept { return fd_; }
    void reset() noexcept
    {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_;
};

class SpawnActions {
public:
    SpawnActions() { posix_spawn_file_actions_init(&actions_); }
    ~SpawnActions() { posix_spawn_file_actions_destroy(&actions_); }
    SpawnActions(const SpawnActions&) = delete;
    SpawnActions& operator=(const SpawnActions&) = delete;

    posix_spawn_file_actions_t* get() noexcept { return &actions_; }

private:
    posix_spawn_file_actions_t actions_{};
};

} // namespace

std::optional<std::filesystem::path> find_program(const std::string& program)
{
    if (program.empty()) {
        return std::nullopt;
    }
    if (program.find('/') != std::string::npos) {
        if (is_executable(program)) {
            return std::filesystem::path(program);
        }
        return std::nullopt;
    }
    const char* path_env = std::getenv("PATH");
    std::string_view search = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
    while (!search.empty()) {
        auto colon = search.find(':');
        auto dir = search.substr(0, colon);
        std::filesystem::path candidate = std::filesystem::path(dir.empty() ? "." : std::string(dir)) / program;
        if (is_executable(candidate)) {
            return candidate;
        }
        if (colon == std::string_view::npos) {
            break;
        }
        search.remove_prefix(colon + 1);
    }
    return std::nullopt;
}

ProcessResult run_process(const std::filesystem::path& program, const std::vector<std::string>& argv,
                          std::chrono::milliseconds timeout, std::size_t stderr_cap)
{
    int pipe_fds[2];
    if (::pipe2(pipe_fds, O_CLOEXEC) != 0) {
        raise(ErrorKind::ToolFailed, std::string("pipe: ") + std::strerror(errno));
    }
    FileDescriptor read_end(pipe_fds[0]);
    FileDescriptor write_end(pipe_fds[1]);

    SpawnActions actions;
    posix_spawn_file_actions_addopen(actions.get(), STDIN_FILENO, "/dev/null", O_RDONLY, 0);
    posix_spawn_file_actions_addopen(actions.get(), STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
    posix_spawn_file_actions_adddup2(actions.get(), write_end.get(), STDERR_FILENO);

    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& arg : argv) {
        args.push_back(const_cast<char*>(arg.c_str()));
    }
    args.push_back(nullptr);

    pid_t pid = 0;
    int rc = ::posix_spawn(&pid, program.c_str(), actions.get(), nullptr, args.data(), environ);
    write_end.reset();
    if (rc != 0) {
        auto kind = (rc == ENOENT || rc == EACCES) ? ErrorKind::ToolNotFound : ErrorKind::ToolFailed;
        raise(kind, "cannot start " + program.string() + ": " + std::strerror(rc));
    }

    ProcessResult result;
    auto deadline = std::chrono::steady_clock::now() + timeout;
    auto remaining_ms = [&] {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        return std::max<long long>(0, left.count());
    };

    char buffer[4096];
    bool pipe_open = true;
    while (pipe_open && !result.timed_out) {
        pollfd pfd{read_end.get(), POLLIN, 0};
        int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining_ms(), 1000)));
        if (ready < 0 && errno != EINTR) {
            break;
        }
        if (ready > 0) {
            auto got = ::read(read_end.get(), buffer, sizeof(buffer));
            if (got <= 0) {
                pipe_open = false;
            } else {
                auto keep = std::min<std::size_t>(static_cast<std::size_t>(got), stderr_cap - result.stderr_text.size());
                result.stderr_text.append(buffer, keep);
                result.stderr_truncated = result.stderr_truncated || keep < static_cast<std::size_t>(got);
            }
        }
        if (remaining_ms() == 0) {
            result.timed_out = true;
        }
    }

    if (result.timed_out) {
        ::kill(pid, SIGKILL);
    }
    int status = 0;
    while (true) {
        pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            break;
        }
        if (done < 0 && errno != EINTR) {
            raise(ErrorKind::ToolFailed, std::string("waitpid: ") + std::strerror(errno));
        }
        if (!result.timed_out && remaining_ms() == 0) {
            result.timed_out = true;
            ::kill(pid, SIGKILL);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signal = WTERMSIG(status);
    }
    return result;
}

} // namespace splitcodec::detail
