#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "splitcodec/codec.hpp"
#include "splitcodec/container.hpp"
#include "splitcodec/record_io.hpp"
#include "splitcodec/split_planner.hpp"

namespace splitcodec {

/// What a map task hands to the shuffle in map/reduce runs.
enum class EmissionMode {
    per_task,     // one aggregate record per map task
    per_sequence, // one record per parsed sequence
};

[[nodiscard]] std::string_view to_string(EmissionMode mode) noexcept;
[[nodiscard]] EmissionMode parse_emission_mode(std::string_view text);

/// Serialized emitted record: u64 key followed by the five letter counts, little-endian.
inline constexpr std::size_t kEmittedRecordSize = 8 + 5 * 8;

[[nodiscard]] std::string serialize_emitted_record(std::uint64_t key, const LetterCounts& counts);

struct MapTaskResult {
    std::uint64_t split_ordinal = 0;
    std::uint64_t anchor_node = 0;
    LetterCounts letter_counts;
    std::uint64_t bytes_read_local = 0;
    std::uint64_t bytes_read_remote = 0;
    std::uint64_t compressed_bytes = 0;
    std::uint64_t exceptional_blocks = 0;
    std::uint64_t records_processed = 0;
    std::uint64_t emitted_records = 0;
    std::uint64_t emitted_bytes = 0;
    std::chrono::nanoseconds read_time{0};
    std::chrono::nanoseconds decompress_time{0};
    std::chrono::nanoseconds map_time{0};
};

struct PhaseTimes {
    double read_s = 0;
    double decompress_s = 0;
    double map_s = 0;
    double shuffle_s = 0;
    double reduce_s = 0;

    bool operator==(const PhaseTimes&) const = default;
};

struct BenchReport {
    std::string dataset;
    std::string codec;
    std::string strategy;
    std::string emission;
    std::uint64_t workers = 0;
    std::uint64_t hdfs_block_size = 0;
    std::uint64_t hdfs_block_count = 0;
    std::uint64_t block_count = 0;
    std::uint64_t split_count = 0;
    std::uint64_t map_task_count = 0;
    std::uint64_t reducer_count = 0;
    LetterCounts letter_counts;
    std::uint64_t records_processed = 0;
    std::uint64_t compressed_bytes = 0;
    std::uint64_t bytes_read_local = 0;
    std::uint64_t bytes_read_remote = 0;
    std::uint64_t predicted_remote_bytes = 0;
    std::uint64_t exceptional_blocks = 0;
    std::uint64_t shuffle_records = 0;
    std::uint64_t shuffle_bytes = 0;
    double wall_time_s = 0;
    PhaseTimes phases;

    bool operator==(const BenchReport&) const = default;
};

struct BenchConfig {
    LayoutParams layout;
    SplitStrategy strategy = SplitStrategy::enhanced;
    std::size_t workers = 1;
    std::size_t reducers = 1;
    EmissionMode emission = EmissionMode::per_task;
};

/**
 * Map-only letter count over every split of a container. Each map task runs
 * on the home node of its anchor physical block, pulls its blocks through the
 * simulated file system (counting local and remote bytes), decompresses them
 * and counts A/C/G/T/N in the parsed sequences (or in all bytes for raw
 * payloads). Errors are rethrown with the failing split identified.
 *
 * `tasks`, when given, receives the per-task results ordered by split.
 */
[[nodiscard]] BenchReport run_count_map(const std::filesystem::path& container, const CodecRegistry& registry,
                                        const BenchConfig& config, std::vector<MapTaskResult>* tasks = nullptr);

/// Letter count with a shuffle: map tasks emit records that are partitioned to
/// `config.reducers` reducers by a stable hash of their key, then summed.
[[nodiscard]] BenchReport run_count_mapreduce(const std::filesystem::path& container, const CodecRegistry& registry,
                                              const BenchConfig& config, std::vector<MapTaskResult>* tasks = nullptr);

struct BlockCountRow {
    std::string file;
    std::string codec;
    std::uint64_t file_length = 0;
    std::uint64_t hdfs_block_count = 0;
    std::string error;
};

/// One row per regular file in `directory`, sorted by name. Containers report
/// their codec, other files "none"; unreadable containers get an error entry.
[[nodiscard]] std::vector<BlockCountRow> run_block_count_report(const std::filesystem::path& directory,
                                                                const CodecRegistry& registry,
                                                                std::uint64_t hdfs_block_size);

enum class ReportFormat { text, json };

[[nodiscard]] std::string emit_report(const BenchReport& report, ReportFormat format);
[[nodiscard]] BenchReport parse_report_json(std::string_view json);
[[nodiscard]] std::string emit_block_count_report(const std::vector<BlockCountRow>& rows, ReportFormat format);

} // namespace splitcodec
