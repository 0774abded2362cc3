#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splitcodec {

inline constexpr std::uint64_t kMaxRecordLength = std::uint64_t{16} << 20;

enum class RecordFormat { raw, fasta, fastq };

[[nodiscard]] std::string_view to_string(RecordFormat format) noexcept;
/// Accepts "raw", "fasta", "fastq". Throws BadValue otherwise.
[[nodiscard]] RecordFormat parse_record_format(std::string_view text);
/// .fasta/.fa -> fasta, .fastq/.fq -> fastq, anything else raw.
[[nodiscard]] RecordFormat infer_record_format(const std::filesystem::path& path);

struct SequenceRecord {
    std::string header;
    std::string sequence;
    std::optional<std::string> plus_line;
    std::optional<std::string> quality;

    bool operator==(const SequenceRecord&) const = default;
};

/// FASTA sequences are written on one line; FASTQ as four lines.
[[nodiscard]] std::string serialize_record(const SequenceRecord& record);

/// Counts of the five nucleotide letters, in the order A, C, G, T, N.
struct LetterCounts {
    std::array<std::uint64_t, 5> values{};

    static constexpr std::string_view kLetters = "ACGTN";

    [[nodiscard]] std::uint64_t total() const noexcept;
    LetterCounts& operator+=(const LetterCounts& other) noexcept;
    bool operator==(const LetterCounts&) const = default;
};

/// Adds the A/C/G/T/N occurrences of `bytes` (upper case only) to `counts`.
void count_letters(std::string_view bytes, LetterCounts& counts) noexcept;

class LineSource;

/**
 * Pull parser over FASTA or FASTQ text.
 *
 * FASTQ records are exactly four lines; FASTA sequence lines may be folded.
 * Lines end in LF only. Memory use is bounded by one record (plus a read
 * buffer), so arbitrarily large streams can be scanned.
 */
class RecordReader {
public:
    RecordReader(std::istream& in, RecordFormat format, std::uint64_t max_record_length = kMaxRecordLength);
    RecordReader(std::string_view data, RecordFormat format, std::uint64_t max_record_length = kMaxRecordLength);
    ~RecordReader();

    RecordReader(RecordReader&&) noexcept;
    RecordReader& operator=(RecordReader&&) noexcept;

    /// Next record, or nullopt at end of input. Throws MalformedRecord / UnexpectedEof.
    [[nodiscard]] std::optional<SequenceRecord> next();

    /// Byte offset where the most recently returned record starts.
    [[nodiscard]] std::uint64_t record_start() const noexcept { return record_start_; }
    /// Byte offset just past the most recently returned record.
    [[nodiscard]] std::uint64_t record_end() const noexcept { return record_end_; }

private:
    std::optional<SequenceRecord> next_fastq();
    std::optional<SequenceRecord> next_fasta();

    std::unique_ptr<LineSource> source_;
    RecordFormat format_;
    std::uint64_t max_record_length_;
    std::uint64_t record_start_ = 0;
    std::uint64_t record_end_ = 0;
    // FASTA header line read while finishing the previous record.
    std::optional<std::string> pending_header_;
    std::uint64_t pending_offset_ = 0;
    std::uint64_t pending_length_ = 0;
};

[[nodiscard]] std::vector<SequenceRecord> scan_records(std::string_view data, RecordFormat format);

struct ChunkPlan {
    std::vector<std::uint64_t> boundaries;
    RecordFormat mode = RecordFormat::raw;
    std::uint64_t target = 0;

    [[nodiscard]] std::size_t chunk_count() const noexcept
    {
        return boundaries.empty() ? 0 : boundaries.size() - 1;
    }
};

/**
 * Cuts input into chunks of about `target` bytes.
 *
 * Raw mode cuts at exact multiples of the target. Record modes move each cut
 * forward to the first record start at or after the multiple, so no record is
 * split; cuts that collapse onto the same record start are merged. The plan
 * always starts at 0 and ends at the input length.
 */
[[nodiscard]] ChunkPlan plan_chunks(std::string_view data, RecordFormat format, std::uint64_t target);
[[nodiscard]] ChunkPlan plan_chunks(std::istream& in, RecordFormat format, std::uint64_t target);

struct SyntheticDataset {
    std::string data;
    LetterCounts counts;
    std::uint64_t records = 0;
};

/// Deterministic for a given seed. FASTA sequences are folded at 60 columns.
[[nodiscard]] SyntheticDataset make_synthetic_dataset(RecordFormat format, std::uint64_t read_count,
                                                      std::uint64_t read_length, std::uint64_t seed);

/// Streaming form of make_synthetic_dataset; returns the ground-truth counts.
LetterCounts write_synthetic_dataset(std::ostream& out, RecordFormat format, std::uint64_t read_count,
                                     std::uint64_t read_length, std::uint64_t seed);

} // namespace splitcodec
