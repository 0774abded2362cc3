#include "splitcodec/external_codec.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

#include "process.hpp"
#include "splitcodec/error.hpp"

namespace splitcodec {

namespace {

std::string_view trim(std::string_view text)
{
    constexpr std::string_view kSpace = " \t\r\n";
    auto first = text.find_first_not_of(kSpace);
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = text.find_last_not_of(kSpace);
    return text.substr(first, last - first + 1);
}

bool parse_bool(std::string_view value, const std::string& key)
{
    std::string lower(value);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "true") return true;
    if (lower == "false") return false;
    raise(ErrorKind::BadValue, key + ": expected true or false, got '" + std::string(value) + "'");
}

struct PendingSpec {
    CodecSpec spec;
    std::set<std::string, std::less<>> seen;
    bool explicit_id = false;
};

constexpr std::string_view kKeyPrefix = "uc.";

} // namespace

std::string normalize_extension(std::string_view ext)
{
    if (ext.empty() || ext.front() == '.') {
        return std::string(ext);
    }
    return "." + std::string(ext);
}

std::vector<CodecSpec> parse_codec_config(std::string_view text)
{
    std::vector<PendingSpec> pending;
    std::map<std::string, std::size_t, std::less<>> slot_of;

    std::size_t line_number = 0;
    while (!text.empty()) {
        auto newline = text.find('\n');
        auto raw_line = text.substr(0, newline);
        text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
        ++line_number;

        auto line = trim(raw_line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto where = "line " + std::to_string(line_number);
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            raise(ErrorKind::BadKey, where + ": expected key=value");
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        std::string key_text(key);
        if (!key.starts_with(kKeyPrefix)) {
            raise(ErrorKind::BadKey, where + ": key '" + key_text + "' does not start with uc.");
        }
        auto rest = key.substr(kKeyPrefix.size());
        auto dot = rest.find('.');
        if (dot == 0 || dot == std::string_view::npos) {
            raise(ErrorKind::BadKey, where + ": key '" + key_text + "' has no codec name");
        }
        auto name = rest.substr(0, dot);
        auto property = rest.substr(dot + 1);

        auto [it, inserted] = slot_of.try_emplace(std::string(name), pending.size());
        if (inserted) {
            PendingSpec fresh;
            fresh.spec.name = std::string(name);
            pending.push_back(std::move(fresh));
        }
        auto& entry = pending[it->second];
        if (!entry.seen.emplace(property).second) {
            raise(ErrorKind::DuplicateName, where + ": '" + key_text + "' is set more than once");
        }
        auto& spec = entry.spec;
        auto optional_value = value.empty() ? std::nullopt : std::optional<std::string>(value);

        if (property == "compress.cmd") {
            spec.compress_cmd = value;
        } else if (property == "decompress.cmd") {
            spec.decompress_cmd = value;
        } else if (property == "io.input.flag") {
            spec.input_flag = optional_value;
        } else if (property == "io.output.flag") {
            spec.output_flag = optional_value;
        } else if (property == "compress.ext") {
            spec.compress_ext = normalize_extension(value);
        } else if (property == "decompress.ext") {
            if (!value.empty()) {
                spec.decompress_ext = normalize_extension(value);
            }
        } else if (property == "io.reverse") {
            spec.reverse = !value.empty() && parse_bool(value, key_text);
        } else if (property == "codec.id") {
            std::uint32_t id = 0;
            auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), id);
            if (ec != std::errc{} || end != value.data() + value.size()) {
                raise(ErrorKind::BadValue, where + ": codec id '" + std::string(value) + "' is not a number");
            }
            if (id < kFirstExternalCodecId) {
                raise(ErrorKind::ReservedId, where + ": external codec ids start at 1000, got " + std::to_string(id));
            }
            spec.codec_id = CodecId{id};
            entry.explicit_id = true;
        } else {
            raise(ErrorKind::BadKey, where + ": unknown property in '" + key_text + "'");
        }
    }

    std::set<std::uint32_t> used;
    for (const auto& entry : pending) {
        const auto& spec = entry.spec;
        if (spec.compress_cmd.empty() || spec.decompress_cmd.empty()) {
            raise(ErrorKind::MissingCommand, "codec '" + spec.name + "' needs both uc." + spec.name +
                                                 ".compress.cmd and uc." + spec.name + ".decompress.cmd");
        }
        if (entry.explicit_id && !used.insert(to_underlying(spec.codec_id)).second) {
            raise(ErrorKind::DuplicateName, "codec id " + std::to_string(to_underlying(spec.codec_id)) +
                                                " is assigned to more than one codec");
        }
    }

    std::vector<CodecSpec> specs;
    specs.reserve(pending.size());
    std::uint32_t next_id = kFirstExternalCodecId;
    for (auto& entry : pending) {
        if (!entry.explicit_id) {
            while (used.contains(next_id)) {
                ++next_id;
            }
            entry.spec.codec_id = CodecId{next_id};
            used.insert(next_id);
        }
        if (entry.spec.compress_ext.empty()) {
            entry.spec.compress_ext = "." + entry.spec.name;
        }
        specs.push_back(std::move(entry.spec));
    }
    return specs;
}

std::vector<CodecSpec> load_codec_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::IoFailure, "cannot open codec config " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_codec_config(text);
}

std::vector<std::string> split_command_template(std::string_view command)
{
    std::vector<std::string> tokens;
    std::string current;
    bool in_token = false;
    char quote = 0;
    for (std::size_t i = 0; i < command.size(); ++i) {
        char c = command[i];
        if (quote != 0) {
            if (c == quote) {
                quote = 0;
            } else if (c == '\\' && quote == '"' && i + 1 < command.size() &&
                       (command[i + 1] == '"' || command[i + 1] == '\\')) {
                current.push_back(command[++i]);
            } else {
                current.push_back(c);
            }
            continue;
        }
        if (c == ' ' || c == '\t') {
            if (in_token) {
                tokens.push_back(std::move(current));
                current.clear();
                in_token = false;
            }
            continue;
        }
        in_token = true;
        if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '\\' && i + 1 < command.size()) {
            current.push_back(command[++i]);
        } else {
            current.push_back(c);
        }
    }
    if (quote != 0) {
        raise(ErrorKind::BadValue, "unterminated quote in command '" + std::string(command) + "'");
    }
    if (in_token) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

AssembledCommand assemble_command(const CodecSpec& spec, Direction direction,
                                  const std::filesystem::path& input_path,
                                  const std::filesystem::path& output_path)
{
    AssembledCommand command;
    command.argv = split_command_template(direction == Direction::compress ? spec.compress_cmd : spec.decompress_cmd);
    command.input_path = input_path;
    command.output_path = output_path;

    auto side = [](const std::optional<std::string>& flag, const std::filesystem::path& path) {
        std::vector<std::string> args;
        if (flag) {
            args.push_back(*flag);
        }
        args.push_back(path.string());
        return args;
    };
    auto input_side = side(spec.input_flag, input_path);
    auto output_side = side(spec.output_flag, output_path);
    auto& first = spec.reverse ? output_side : input_side;
    auto& second = spec.reverse ? input_side : output_side;
    command.argv.insert(command.argv.end(), first.begin(), first.end());
    command.argv.insert(command.argv.end(), second.begin(), second.end());
    return command;
}

std::filesystem::path default_staging_dir()
{
    if (const char* env = std::getenv("SPLITCODEC_STAGING"); env != nullptr && *env != '\0') {
        return env;
    }
    std::error_code ec;
    if (std::filesystem::is_directory("/dev/shm", ec) && ::access("/dev/shm", W_OK | X_OK) == 0) {
        return "/dev/shm";
    }
    return std::filesystem::temp_directory_path();
}

ProcessSlots::ProcessSlots(std::size_t limit) : limit_(std::max<std::size_t>(1, limit)) {}

void ProcessSlots::acquire()
{
    std::unique_lock lock(mutex_);
    released_.wait(lock, [this] { return in_use_ < limit_; });
    ++in_use_;
}

void ProcessSlots::release()
{
    {
        std::lock_guard lock(mutex_);
        --in_use_;
    }
    released_.notify_one();
}

std::shared_ptr<ProcessSlots> default_process_slots()
{
    static auto slots = std::make_shared<ProcessSlots>(std::max(1u, std::thread::hardware_concurrency()));
    return slots;
}

namespace {

std::string random_token()
{
    thread_local std::mt19937_64 rng = [] {
        std::random_device device;
        std::seed_seq seq{device(), device(), device(), device(),
                          static_cast<unsigned>(std::hash<std::thread::id>{}(std::this_thread::get_id()))};
        return std::mt19937_64(seq);
    }();
    static constexpr char kHex[] = "0123456789abcdef";
    std::string token;
    for (int word = 0; word < 2; ++word) {
        auto bits = rng();
        for (int i = 0; i < 16; ++i) {
            token.push_back(kHex[(bits >> (4 * i)) & 0xF]);
        }
    }
    return token;
}

/// Removes every staging entry that starts with the operation's token.
class StagingScope {
public:
    StagingScope(std::filesystem::path dir, std::string token) : dir_(std::move(dir)), token_(std::move(token)) {}
    ~StagingScope()
    {
        std::error_code ec;
        for (auto it = std::filesystem::directory_iterator(dir_, ec); !ec && it != std::filesystem::directory_iterator();
             it.increment(ec)) {
            if (it->path().filename().string().starts_with(token_)) {
                std::error_code ignored;
                std::filesystem::remove_all(it->path(), ignored);
            }
        }
    }
    StagingScope(const StagingScope&) = delete;
    StagingScope& operator=(const StagingScope&) = delete;

private:
    std::filesystem::path dir_;
    std::string token_;
};

void write_exclusive(const std::filesystem::path& path, std::string_view data)
{
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0600);
    if (fd < 0) {
        raise(ErrorKind::StagingFailure, "cannot create " + path.string() + ": " + std::strerror(errno));
    }
    std::size_t written = 0;
    while (written < data.size()) {
        auto n = ::write(fd, data.data() + written, data.size() - written);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            auto err = errno;
            ::close(fd);
            raise(ErrorKind::StagingFailure, "cannot write " + path.string() + ": " + std::strerror(err));
        }
        written += static_cast<std::size_t>(n);
    }
    if (::close(fd) != 0) {
        raise(ErrorKind::StagingFailure, "cannot close " + path.string() + ": " + std::strerror(errno));
    }
}

std::string read_whole(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::StagingFailure, "cannot open tool output " + path.string());
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        raise(ErrorKind::StagingFailure, "cannot read tool output " + path.string());
    }
    return data;
}

} // namespace

ExternalCodec::ExternalCodec(CodecSpec spec, ExternalOptions options)
    : BlockCodec(options.max_block_size), spec_(std::move(spec)), options_(std::move(options))
{
    if (spec_.compress_cmd.empty() || spec_.decompress_cmd.empty()) {
        raise(ErrorKind::MissingCommand, "codec '" + spec_.name + "' needs compress and decompress commands");
    }
    if (to_underlying(spec_.codec_id) < kFirstExternalCodecId) {
        raise(ErrorKind::ReservedId, "external codec ids start at 1000");
    }
    spec_.compress_ext = normalize_extension(spec_.compress_ext.empty() ? spec_.name : spec_.compress_ext);
    spec_.decompress_ext = normalize_extension(spec_.decompress_ext);
    if (!options_.slots) {
        options_.slots = default_process_slots();
    }
    staging_dir_ = spec_.staging_dir.empty() ? default_staging_dir() : spec_.staging_dir;
}

std::string ExternalCodec::do_compress(std::string_view data) const
{
    return run(Direction::compress, data);
}

std::string ExternalCodec::do_decompress(std::string_view data, std::size_t expected_size) const
{
    auto out = run(Direction::decompress, data);
    if (out.size() != expected_size) {
        raise(ErrorKind::SizeMismatch, spec_.name + " decompressed " + std::to_string(out.size()) +
                                           " bytes, expected " + std::to_string(expected_size));
    }
    return out;
}

std::string ExternalCodec::run(Direction direction, std::string_view data) const
{
    const auto& template_text = direction == Direction::compress ? spec_.compress_cmd : spec_.decompress_cmd;
    auto tokens = split_command_template(template_text);
    if (tokens.empty()) {
        raise(ErrorKind::MissingCommand, "codec '" + spec_.name + "' has an empty command");
    }
    auto program = detail::find_program(tokens.front());
    if (!program) {
        raise(ErrorKind::ToolNotFound, "'" + tokens.front() + "' is not on the execution path");
    }
    std::error_code ec;
    if (!std::filesystem::is_directory(staging_dir_, ec)) {
        raise(ErrorKind::StagingFailure, "staging directory " + staging_dir_.string() + " does not exist");
    }

    auto token = random_token();
    StagingScope scope(staging_dir_, token);
    auto plain = staging_dir_ / (token + spec_.decompress_ext);
    auto packed = staging_dir_ / (token + spec_.decompress_ext + spec_.compress_ext);
    auto input_path = direction == Direction::compress ? plain : packed;
    auto output_path = direction == Direction::compress ? packed : plain;

    write_exclusive(input_path, data);
    auto command = assemble_command(spec_, direction, input_path, output_path);

    detail::ProcessResult result;
    {
        ProcessSlots::Guard slot(*options_.slots);
        result = detail::run_process(*program, command.argv, options_.timeout, options_.stderr_cap);
    }
    auto verb = direction == Direction::compress ? "compress" : "decompress";
    if (result.timed_out) {
        raise(ErrorKind::ToolFailed, spec_.name + " " + verb + " timed out after " +
                                         std::to_string(options_.timeout.count()) + " ms; stderr: " +
                                         result.stderr_text);
    }
    if (result.signal) {
        raise(ErrorKind::ToolFailed, spec_.name + " " + verb + " killed by signal " + std::to_string(*result.signal) +
                                         "; stderr: " + result.stderr_text);
    }
    if (result.exit_code != 0) {
        raise(ErrorKind::ToolFailed, spec_.name + " " + verb + " exited with status " +
                                         std::to_string(result.exit_code) + "; stderr: " + result.stderr_text);
    }
    if (!std::filesystem::exists(output_path, ec)) {
        raise(ErrorKind::OutputMissing, spec_.name + " " + verb + " exited 0 but wrote no " +
                                            output_path.filename().string());
    }
    return read_whole(output_path);
}

std::string external_compress_block(const CodecSpec& spec, std::string_view data, ExternalOptions options)
{
    return ExternalCodec(spec, std::move(options)).compress(data);
}

std::string external_decompress_block(const CodecSpec& spec, std::string_view data, std::size_t expected_size,
                                      ExternalOptions options)
{
    return ExternalCodec(spec, std::move(options)).decompress(data, expected_size);
}

CodecRegistry make_registry(const std::vector<CodecSpec>& specs, ExternalOptions options)
{
    CodecRegistry registry;
    for (const auto& spec : specs) {
        registry.add(std::make_shared<ExternalCodec>(spec, options));
    }
    return registry;
}

} // namespace splitcodec
