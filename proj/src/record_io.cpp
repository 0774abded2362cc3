#include "splitcodec/record_io.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "splitcodec/error.hpp"

namespace splitcodec {

std::string_view to_string(RecordFormat format) noexcept
{
    switch (format) {
    case RecordFormat::raw: return "raw";
    case RecordFormat::fasta: return "fasta";
    case RecordFormat::fastq: return "fastq";
    }
    return "raw";
}

RecordFormat parse_record_format(std::string_view text)
{
    if (text == "raw") return RecordFormat::raw;
    if (text == "fasta") return RecordFormat::fasta;
    if (text == "fastq") return RecordFormat::fastq;
    raise(ErrorKind::BadValue, "unknown record format '" + std::string(text) + "'");
}

RecordFormat infer_record_format(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".fasta" || ext == ".fa") return RecordFormat::fasta;
    if (ext == ".fastq" || ext == ".fq") return RecordFormat::fastq;
    return RecordFormat::raw;
}

std::string serialize_record(const SequenceRecord& record)
{
    std::string out;
    if (record.quality) {
        out.reserve(record.header.size() + 2 * record.sequence.size() + 8);
        out += '@';
        out += record.header;
        out += '\n';
        out += record.sequence;
        out += "\n+";
        out += record.plus_line.value_or("");
        out += '\n';
        out += *record.quality;
        out += '\n';
    } else {
        out += '>';
        out += record.header;
        out += '\n';
        out += record.sequence;
        out += '\n';
    }
    return out;
}

std::uint64_t LetterCounts::total() const noexcept
{
    std::uint64_t sum = 0;
    for (auto v : values) {
        sum += v;
    }
    return sum;
}

LetterCounts& LetterCounts::operator+=(const LetterCounts& other) noexcept
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] += other.values[i];
    }
    return *this;
}

namespace {

constexpr std::array<std::int8_t, 256> make_letter_table()
{
    std::array<std::int8_t, 256> table{};
    table.fill(-1);
    table['A'] = 0;
    table['C'] = 1;
    table['G'] = 2;
    table['T'] = 3;
    table['N'] = 4;
    return table;
}

constexpr auto kLetterTable = make_letter_table();

} // namespace

void count_letters(std::string_view bytes, LetterCounts& counts) noexcept
{
    for (unsigned char c : bytes) {
        auto slot = kLetterTable[c];
        if (slot >= 0) {
            ++counts.values[static_cast<std::size_t>(slot)];
        }
    }
}

/// Yields LF-terminated lines. The view returned by next_line stays valid until the next call.
class LineSource {
public:
    virtual ~LineSource() = default;

    /// False at end of input. `terminated` is false only for a final line with no LF.
    virtual bool next_line(std::string_view& line, bool& terminated) = 0;

    /// Offset of the first byte not yet returned.
    [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

protected:
    std::uint64_t offset_ = 0;
};

namespace {

class MemoryLineSource final : public LineSource {
public:
    explicit MemoryLineSource(std::string_view data) : data_(data) {}

    bool next_line(std::string_view& line, bool& terminated) override
    {
        if (pos_ >= data_.size()) {
            return false;
        }
        auto newline = data_.find('\n', pos_);
        terminated = newline != std::string_view::npos;
        auto end = terminated ? newline : data_.size();
        line = data_.substr(pos_, end - pos_);
        pos_ = terminated ? end + 1 : end;
        offset_ = pos_;
        return true;
    }

private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

class StreamLineSource final : public LineSource {
public:
    StreamLineSource(std::istream& in, std::uint64_t max_line) : in_(in), max_line_(max_line) {}

    bool next_line(std::string_view& line, bool& terminated) override
    {
        std::size_t scan_from = start_;
        while (true) {
            auto newline = buffer_.find('\n', scan_from);
            if (newline != std::string::npos) {
                line = std::string_view(buffer_).substr(start_, newline - start_);
                terminated = true;
                return consume(newline + 1);
            }
            if (buffer_.size() - start_ > max_line_) {
                raise(ErrorKind::MalformedRecord, "line at byte " + std::to_string(offset_) + " exceeds " +
                                                      std::to_string(max_line_) + " bytes");
            }
            auto scanned = buffer_.size() - start_;
            if (!fill()) {
                if (start_ >= buffer_.size()) {
                    return false;
                }
                line = std::string_view(buffer_).substr(start_);
                terminated = false;
                return consume(buffer_.size());
            }
            scan_from = start_ + scanned;
        }
    }

private:
    bool consume(std::size_t end)
    {
        offset_ += end - start_;
        start_ = end;
        return true;
    }

    bool fill()
    {
        if (eof_) {
            return false;
        }
        if (start_ > 0) {
            // Compact only once the previous line's view is no longer needed (next_line is re-entered).
            buffer_.erase(0, start_);
            start_ = 0;
        }
        auto old_size = buffer_.size();
        buffer_.resize(old_size + kReadSize);
        in_.read(buffer_.data() + old_size, static_cast<std::streamsize>(kReadSize));
        auto got = static_cast<std::size_t>(in_.gcount());
        buffer_.resize(old_size + got);
        if (got == 0) {
            eof_ = true;
            if (in_.bad()) {
                raise(ErrorKind::IoFailure, "read error at byte " + std::to_string(offset_));
            }
            return false;
        }
        return true;
    }

    static constexpr std::size_t kReadSize = std::size_t{1} << 16;

    std::istream& in_;
    std::uint64_t max_line_;
    std::string buffer_;
    std::size_t start_ = 0;
    bool eof_ = false;
};

void reject_carriage_return(std::string_view line, std::uint64_t line_offset)
{
    auto cr = line.find('\r');
    if (cr != std::string_view::npos) {
        raise(ErrorKind::MalformedRecord, "carriage return at byte " + std::to_string(line_offset + cr));
    }
}

} // namespace

RecordReader::RecordReader(std::istream& in, RecordFormat format, std::uint64_t max_record_length)
    : source_(std::make_unique<StreamLineSource>(in, max_record_length)), format_(format),
      max_record_length_(max_record_length)
{
}

RecordReader::RecordReader(std::string_view data, RecordFormat format, std::uint64_t max_record_length)
    : source_(std::make_unique<MemoryLineSource>(data)), format_(format), max_record_length_(max_record_length)
{
}

RecordReader::~RecordReader() = default;
RecordReader::RecordReader(RecordReader&&) noexcept = default;
RecordReader& RecordReader::operator=(RecordReader&&) noexcept = default;

std::optional<SequenceRecord> RecordReader::next()
{
    switch (format_) {
    case RecordFormat::fastq: return next_fastq();
    case RecordFormat::fasta: return next_fasta();
    case RecordFormat::raw: break;
    }
    raise(ErrorKind::BadValue, "raw data has no records");
}

std::optional<SequenceRecord> RecordReader::next_fastq()
{
    std::string_view line;
    bool terminated = false;
    auto start = source_->offset();
    if (!source_->next_line(line, terminated)) {
        record_start_ = record_end_ = start;
        return std::nullopt;
    }
    reject_carriage_return(line, start);
    if (line.empty() || line.front() != '@') {
        raise(ErrorKind::MalformedRecord, "expected '@' at byte " + std::to_string(start));
    }
    SequenceRecord record;
    record.header = line.substr(1);

    auto next_required = [&](const char* what) {
        auto line_offset = source_->offset();
        if (!terminated || !source_->next_line(line, terminated)) {
            raise(ErrorKind::UnexpectedEof, std::string("missing ") + what + " line of the record at byte " +
                                                std::to_string(start));
        }
        reject_carriage_return(line, line_offset);
        return line_offset;
    };

    next_required("sequence");
    record.sequence = line;
    auto plus_offset = next_required("'+'");
    if (line.empty() || line.front() != '+') {
        raise(ErrorKind::MalformedRecord, "expected '+' at byte " + std::to_string(plus_offset));
    }
    record.plus_line = std::string(line.substr(1));
    auto quality_offset = next_required("quality");
    if (line.size() != record.sequence.size()) {
        raise(ErrorKind::MalformedRecord, "quality length " + std::to_string(line.size()) +
                                              " differs from sequence length " +
                                              std::to_string(record.sequence.size()) + " at byte " +
                                              std::to_string(quality_offset));
    }
    record.quality = std::string(line);

    auto end = source_->offset();
    if (end - start > max_record_length_) {
        raise(ErrorKind::MalformedRecord, "record at byte " + std::to_string(start) + " exceeds " +
                                              std::to_string(max_record_length_) + " bytes");
    }
    record_start_ = start;
    record_end_ = end;
    return record;
}

std::optional<SequenceRecord> RecordReader::next_fasta()
{
    std::string_view line;
    bool terminated = false;
    SequenceRecord record;
    std::uint64_t start = 0;
    std::uint64_t length = 0;

    if (pending_header_) {
        record.header = std::move(*pending_header_);
        pending_header_.reset();
        start = pending_offset_;
        length = pending_length_;
    } else {
        start = source_->offset();
        if (!source_->next_line(line, terminated)) {
            record_start_ = record_end_ = start;
            return std::nullopt;
        }
        reject_carriage_return(line, start);
        if (line.empty() || line.front() != '>') {
            raise(ErrorKind::MalformedRecord, "expected '>' at byte " + std::to_string(start));
        }
        record.header = line.substr(1);
        length = source_->offset() - start;
    }

    while (true) {
        auto line_offset = source_->offset();
        if (!source_->next_line(line, terminated)) {
            break;
        }
        reject_carriage_return(line, line_offset);
        auto line_length = source_->offset() - line_offset;
        if (!line.empty() && line.front() == '>') {
            pending_header_ = std::string(line.substr(1));
            pending_offset_ = line_offset;
            pending_length_ = line_length;
            break;
        }
        length += line_length;
        if (length > max_record_length_) {
            raise(ErrorKind::MalformedRecord, "record at byte " + std::to_string(start) + " exceeds " +
                                                  std::to_string(max_record_length_) + " bytes");
        }
        record.sequence += line;
    }
    record_start_ = start;
    record_end_ = start + length;
    return record;
}

std::vector<SequenceRecord> scan_records(std::string_view data, RecordFormat format)
{
    std::vector<SequenceRecord> records;
    RecordReader reader(data, format);
    while (auto record = reader.next()) {
        records.push_back(std::move(*record));
    }
    return records;
}

namespace {

void check_target(std::uint64_t target)
{
    if (target == 0) {
        raise(ErrorKind::BadParams, "chunk target must be at least 1 byte");
    }
}

ChunkPlan raw_plan(std::uint64_t length, std::uint64_t target)
{
    ChunkPlan plan{{0}, RecordFormat::raw, target};
    for (std::uint64_t cut = target; cut < length; cut += target) {
        plan.boundaries.push_back(cut);
    }
    if (length > 0) {
        plan.boundaries.push_back(length);
    }
    return plan;
}

ChunkPlan record_plan(RecordReader& reader, RecordFormat format, std::uint64_t target)
{
    ChunkPlan plan{{0}, format, target};
    std::uint64_t next_cut = target;
    std::uint64_t length = 0;
    while (reader.next()) {
        auto start = reader.record_start();
        if (start >= next_cut) {
            plan.boundaries.push_back(start);
            next_cut = (start / target + 1) * target;
        }
        length = reader.record_end();
    }
    if (length > 0) {
        plan.boundaries.push_back(length);
    }
    return plan;
}

} // namespace

ChunkPlan plan_chunks(std::string_view data, RecordFormat format, std::uint64_t target)
{
    check_target(target);
    if (format == RecordFormat::raw) {
        return raw_plan(data.size(), target);
    }
    RecordReader reader(data, format);
    return record_plan(reader, format, target);
}

ChunkPlan plan_chunks(std::istream& in, RecordFormat format, std::uint64_t target)
{
    check_target(target);
    if (format == RecordFormat::raw) {
        std::uint64_t length = 0;
        std::string buffer(std::size_t{1} << 16, '\0');
        while (in.read(buffer.data(), static_cast<std::streamsize>(buffer.size())) || in.gcount() > 0) {
            length += static_cast<std::uint64_t>(in.gcount());
        }
        return raw_plan(length, target);
    }
    RecordReader reader(in, format);
    return record_plan(reader, format, target);
}

namespace {

constexpr std::size_t kFastaLineWidth = 60;
constexpr std::string_view kBases = "ACGT";

/// Emits synthetic reads one at a time. Uses mt19937_64 directly (its output
/// sequence is fixed by the standard) so datasets are identical across builds.
class ReadSynthesizer {
public:
    ReadSynthesizer(RecordFormat format, std::uint64_t read_length, std::uint64_t seed)
        : format_(format), read_length_(read_length), rng_(seed)
    {
        if (format_ == RecordFormat::raw) {
            raise(ErrorKind::BadParams, "synthetic datasets are FASTA or FASTQ");
        }
        if (read_length_ == 0) {
            raise(ErrorKind::BadParams, "read length must be at least 1");
        }
    }

    /// Appends read number `ordinal` to `out` and its letters to `counts`.
    void append(std::uint64_t ordinal, std::string& out, LetterCounts& counts)
    {
        sequence_.clear();
        for (std::uint64_t i = 0; i < read_length_; ++i) {
            auto r = rng_();
            // ~1% N, the rest uniform over ACGT.
            char base = (r % 100 == 0) ? 'N' : kBases[(r >> 32) & 3];
            sequence_.push_back(base);
        }
        count_letters(sequence_, counts);

        if (format_ == RecordFormat::fastq) {
            out += "@synth.";
            out += std::to_string(ordinal);
            out += " length=";
            out += std::to_string(read_length_);
            out += '\n';
            out += sequence_;
            out += "\n+\n";
            for (std::uint64_t i = 0; i < read_length_; ++i) {
                out.push_back(static_cast<char>('!' + rng_() % 41));
            }
            out += '\n';
        } else {
            out += ">synth.";
            out += std::to_string(ordinal);
            out += '\n';
            for (std::size_t pos = 0; pos < sequence_.size(); pos += kFastaLineWidth) {
                out.append(sequence_, pos, kFastaLineWidth);
                out += '\n';
            }
        }
    }

private:
    RecordFormat format_;
    std::uint64_t read_length_;
    std::mt19937_64 rng_;
    std::string sequence_;
};

} // namespace

SyntheticDataset make_synthetic_dataset(RecordFormat format, std::uint64_t read_count, std::uint64_t read_length,
                                        std::uint64_t seed)
{
    ReadSynthesizer synth(format, read_length, seed);
    SyntheticDataset dataset;
    dataset.data.reserve(read_count * (2 * read_length + 32));
    for (std::uint64_t i = 0; i < read_count; ++i) {
        synth.append(i + 1, dataset.data, dataset.counts);
    }
    dataset.records = read_count;
    return dataset;
}

LetterCounts write_synthetic_dataset(std::ostream& out, RecordFormat format, std::uint64_t read_count,
                                     std::uint64_t read_length, std::uint64_t seed)
{
    ReadSynthesizer synth(format, read_length, seed);
    LetterCounts counts;
    std::string buffer;
    for (std::uint64_t i = 0; i < read_count; ++i) {
        synth.append(i + 1, buffer, counts);
        if (buffer.size() >= (std::size_t{1} << 20)) {
            out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            buffer.clear();
        }
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) {
        raise(ErrorKind::IoFailure, "failed to write synthetic dataset");
    }
    return counts;
}

} // namespace splitcodec
