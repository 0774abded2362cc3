#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitcodec/codec.hpp"

namespace splitcodec {

/// One command-line compressor, described by its `uc.<name>.*` properties.
struct CodecSpec {
    std::string name;
    std::string compress_cmd;
    std::string decompress_cmd;
    std::optional<std::string> input_flag;
    std::optional<std::string> output_flag;
    std::string compress_ext;
    std::string decompress_ext = ".fastq";
    bool reverse = false;
    CodecId codec_id{kFirstExternalCodecId};
    /// Empty means default_staging_dir().
    std::filesystem::path staging_dir;

    bool operator==(const CodecSpec&) const = default;
};

enum class Direction { compress, decompress };

struct AssembledCommand {
    std::vector<std::string> argv;
    std::filesystem::path input_path;
    std::filesystem::path output_path;
};

/**
 * Parses line-oriented `key=value` text. Recognized keys are
 * uc.<name>.compress.cmd, .decompress.cmd, .io.input.flag, .io.output.flag,
 * .compress.ext, .decompress.ext, .io.reverse and .codec.id. Lines whose first
 * non-blank character is '#' are comments; empty values mean "unset".
 *
 * Specs come back in order of first appearance. Names without a codec.id get
 * the lowest free id from 1000 upward, in that order.
 */
[[nodiscard]] std::vector<CodecSpec> parse_codec_config(std::string_view text);
[[nodiscard]] std::vector<CodecSpec> load_codec_config(const std::filesystem::path& path);

/// Splits a command template into tokens; single quotes, double quotes and backslash escapes group words.
[[nodiscard]] std::vector<std::string> split_command_template(std::string_view command);

/// "fastq" -> ".fastq"; "" stays "".
[[nodiscard]] std::string normalize_extension(std::string_view ext);

/**
 * Builds the argv for one invocation: template tokens, then the input and
 * output arguments. Each side is `flag path` when its flag is set and a bare
 * path otherwise; `reverse` puts the output side first.
 */
[[nodiscard]] AssembledCommand assemble_command(const CodecSpec& spec, Direction direction,
                                                const std::filesystem::path& input_path,
                                                const std::filesystem::path& output_path);

/// $SPLITCODEC_STAGING if set, else /dev/shm when writable, else the system temp directory.
[[nodiscard]] std::filesystem::path default_staging_dir();

/// Counting semaphore bounding concurrent child processes.
class ProcessSlots {
public:
    explicit ProcessSlots(std::size_t limit);

    void acquire();
    void release();
    [[nodiscard]] std::size_t limit() const noexcept { return limit_; }

    class Guard {
    public:
        explicit Guard(ProcessSlots& slots) : slots_(slots) { slots_.acquire(); }
        ~Guard() { slots_.release(); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        ProcessSlots& slots_;
    };

private:
    std::size_t limit_;
    std::size_t in_use_ = 0;
    std::mutex mutex_;
    std::condition_variable released_;
};

/// Process-wide slots sized to the logical CPU count.
[[nodiscard]] std::shared_ptr<ProcessSlots> default_process_slots();

struct ExternalOptions {
    std::chrono::milliseconds timeout = std::chrono::seconds(300);
    std::size_t stderr_cap = 8 * 1024;
    std::size_t max_block_size = kDefaultMaxBlockSize;
    /// Null means default_process_slots().
    std::shared_ptr<ProcessSlots> slots;
};

/**
 * Runs a command-line compressor once per block.
 *
 * Each call stages its input as `<128-bit hex><ext>` (exclusive create) in the
 * staging directory, runs the assembled command, reads back the predicted
 * output file and removes every staging entry carrying its hex prefix, on
 * success and on failure alike. Compression stages `<hex><decompress_ext>` and
 * expects `<hex><decompress_ext><compress_ext>`; decompression runs the other
 * way round.
 */
class ExternalCodec final : public BlockCodec {
public:
    explicit ExternalCodec(CodecSpec spec, ExternalOptions options = {});

    [[nodiscard]] CodecId id() const noexcept override { return spec_.codec_id; }
    [[nodiscard]] std::string_view name() const noexcept override { return spec_.name; }
    [[nodiscard]] const CodecSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const std::filesystem::path& staging_dir() const noexcept { return staging_dir_; }

protected:
    [[nodiscard]] std::string do_compress(std::string_view data) const override;
    [[nodiscard]] std::string do_decompress(std::string_view data, std::size_t expected_size) const override;

private:
    [[nodiscard]] std::string run(Direction direction, std::string_view data) const;

    CodecSpec spec_;
    ExternalOptions options_;
    std::filesystem::path staging_dir_;
};

[[nodiscard]] std::string external_compress_block(const CodecSpec& spec, std::string_view data,
                                                  ExternalOptions options = {});
[[nodiscard]] std::string external_decompress_block(const CodecSpec& spec, std::string_view data,
                                                    std::size_t expected_size, ExternalOptions options = {});

/// Built-ins plus one ExternalCodec per spec.
[[nodiscard]] CodecRegistry make_registry(const std::vector<CodecSpec>& specs, ExternalOptions options = {});

} // namespace splitcodec
