#include "splitcodec/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "little_endian.hpp"
#include "splitcodec/error.hpp"
#include "splitcodec/work_stealing.hpp"

namespace splitcodec {

using Clock = std::chrono::steady_clock;

std::string_view to_string(EmissionMode mode) noexcept
{
    return mode == EmissionMode::per_task ? "per-task" : "per-sequence";
}

EmissionMode parse_emission_mode(std::string_view text)
{
    if (text == "per-task") return EmissionMode::per_task;
    if (text == "per-sequence") return EmissionMode::per_sequence;
    raise(ErrorKind::BadValue, "unknown emission mode '" + std::string(text) + "'");
}

std::string serialize_emitted_record(std::uint64_t key, const LetterCounts& counts)
{
    std::string out;
    out.reserve(kEmittedRecordSize);
    detail::put_le<std::uint64_t>(out, key);
    for (auto value : counts.values) {
        detail::put_le<std::uint64_t>(out, value);
    }
    return out;
}

namespace {

double seconds(std::chrono::nanoseconds d)
{
    return std::chrono::duration<double>(d).count();
}

std::uint64_t partition_hash(std::uint64_t key)
{
    key += 0x9E3779B97F4A7C15ull;
    key = (key ^ (key >> 30)) * 0xBF58476D1CE4E5B9ull;
    key = (key ^ (key >> 27)) * 0x94D049BB133111EBull;
    return key ^ (key >> 31);
}

/// Reads byte ranges of the container as a task on `node` would see them in
/// the simulated file system, splitting each range at physical block edges.
class DfsReader {
public:
    DfsReader(const std::filesystem::path& path, const HdfsLayout& layout, std::uint32_t node)
        : in_(path, std::ios::binary), layout_(layout), node_(node)
    {
        if (!in_) {
            raise(ErrorKind::IoFailure, "cannot open " + path.string());
        }
    }

    std::string read(const BlockRef& ref, MapTaskResult& result)
    {
        auto bytes = read_compressed(in_, ref);
        std::uint64_t offset = ref.offset;
        std::uint64_t pieces = 0;
        while (offset < ref.end()) {
            const auto& physical = layout_.block_at(offset);
            auto length = std::min(ref.end(), physical.end()) - offset;
            (physical.held_by(node_) ? result.bytes_read_local : result.bytes_read_remote) += length;
            offset += length;
            ++pieces;
        }
        if (pieces > 1) {
            ++result.exceptional_blocks;
        }
        return bytes;
    }

private:
    std::ifstream in_;
    const HdfsLayout& layout_;
    std::uint32_t node_;
};

struct JobOutput {
    BenchReport report;
    std::vector<MapTaskResult> tasks;
};

JobOutput run_job(const std::filesystem::path& path, const CodecRegistry& registry, const BenchConfig& config,
                  bool with_reduce)
{
    auto wall_start = Clock::now();
    if (with_reduce && config.reducers == 0) {
        raise(ErrorKind::BadParams, "need at least one reducer");
    }

    auto info = read_index(path);
    auto index = share_index(info.index);
    auto codec = registry.resolve(info.header.codec_id);
    auto payload = info.header.fastq() ? RecordFormat::fastq
                   : info.header.fasta() ? RecordFormat::fasta
                                         : RecordFormat::raw;
    if (payload != RecordFormat::raw && !info.header.record_aligned()) {
        raise(ErrorKind::BadParams, "container carries " + std::string(to_string(payload)) +
                                        " but its blocks are not record-aligned");
    }

    auto layout = layout_file(info.file_length, config.layout);
    auto splits = plan_splits(index->index(), layout, config.strategy);

    std::uint64_t predicted_remote = 0;
    for (const auto& split : splits) {
        for (const auto& ref : split.member_blocks) {
            predicted_remote += resolve_block(ref, layout).remote_bytes;
        }
    }

    auto reducers = with_reduce ? config.reducers : 0;
    std::vector<MapTaskResult> results(splits.size());
    std::vector<std::vector<std::string>> partitions(splits.size(), std::vector<std::string>(reducers));

    run_work_stealing(splits.size(), config.workers, [&](std::size_t task) {
        const auto& split = splits[task];
        auto& result = results[task];
        result.split_ordinal = split.ordinal;
        try {
            auto node = layout.blocks[*split.anchor_hdfs_block].home();
            result.anchor_node = node;
            DfsReader reader(path, layout, node);
            auto emit = [&](std::uint64_t key, const LetterCounts& counts) {
                auto record = serialize_emitted_record(key, counts);
                partitions[task][partition_hash(key) % reducers] += record;
                ++result.emitted_records;
                result.emitted_bytes += record.size();
            };
            for (const auto& ref : split.member_blocks) {
                const auto& block = index->block(ref.ordinal);
                auto t0 = Clock::now();
                auto compressed = reader.read(block, result);
                auto t1 = Clock::now();
                auto plain = codec->decompress(compressed, block.uncompressed_len);
                auto t2 = Clock::now();
                result.compressed_bytes += block.compressed_len;

                if (payload == RecordFormat::raw) {
                    LetterCounts counts;
                    count_letters(plain, counts);
                    result.letter_counts += counts;
                    if (reducers > 0 && config.emission == EmissionMode::per_sequence) {
                        emit(block.ordinal << 32, counts);
                    }
                } else {
                    RecordReader records(plain, payload);
                    std::uint64_t local_index = 0;
                    while (auto record = records.next()) {
                        LetterCounts counts;
                        count_letters(record->sequence, counts);
                        result.letter_counts += counts;
                        ++result.records_processed;
                        if (reducers > 0 && config.emission == EmissionMode::per_sequence) {
                            emit((block.ordinal << 32) | local_index, counts);
                        }
                        ++local_index;
                    }
                }
                auto t3 = Clock::now();
                result.read_time += t1 - t0;
                result.decompress_time += t2 - t1;
                result.map_time += t3 - t2;
            }
            if (reducers > 0 && config.emission == EmissionMode::per_task) {
                emit(split.ordinal, result.letter_counts);
            }
        } catch (const Error& e) {
            throw Error(e.kind(), "split " + std::to_string(split.ordinal) + ": " + e.detail());
        }
    });

    JobOutput out;
    auto& report = out.report;
    report.dataset = path.filename().string();
    report.codec = std::string(codec->name());
    report.strategy = std::string(to_string(config.strategy));
    report.emission = with_reduce ? std::string(to_string(config.emission)) : "none";
    report.workers = config.workers;
    report.hdfs_block_size = layout.hdfs_block_size;
    report.hdfs_block_count = layout.blocks.size();
    report.block_count = index->block_count();
    report.split_count = splits.size();
    report.map_task_count = results.size();
    report.reducer_count = reducers;
    report.predicted_remote_bytes = predicted_remote;

    LetterCounts map_totals;
    for (const auto& result : results) {
        map_totals += result.letter_counts;
        report.records_processed += result.records_processed;
        report.compressed_bytes += result.compressed_bytes;
        report.bytes_read_local += result.bytes_read_local;
        report.bytes_read_remote += result.bytes_read_remote;
        report.exceptional_blocks += result.exceptional_blocks;
        report.phases.read_s += seconds(result.read_time);
        report.phases.decompress_s += seconds(result.decompress_time);
        report.phases.map_s += seconds(result.map_time);
    }

    if (!with_reduce) {
        report.letter_counts = map_totals;
    } else {
        auto shuffle_start = Clock::now();
        std::vector<std::string> reducer_input(reducers);
        for (auto& task_partitions : partitions) {
            for (std::size_t r = 0; r < reducers; ++r) {
                reducer_input[r] += task_partitions[r];
                task_partitions[r].clear();
            }
        }
        for (const auto& input : reducer_input) {
            report.shuffle_bytes += input.size();
        }
        report.shuffle_records = report.shuffle_bytes / kEmittedRecordSize;
        auto reduce_start = Clock::now();

        std::vector<LetterCounts> reducer_totals(reducers);
        run_work_stealing(reducers, config.workers, [&](std::size_t r) {
            std::string_view input = reducer_input[r];
            for (std::size_t pos = 0; pos + kEmittedRecordSize <= input.size(); pos += kEmittedRecordSize) {
                for (std::size_t letter = 0; letter < 5; ++letter) {
                    reducer_totals[r].values[letter] += detail::get_le<std::uint64_t>(input, pos + 8 + 8 * letter);
                }
            }
        });
        for (const auto& total : reducer_totals) {
            report.letter_counts += total;
        }
        auto reduce_end = Clock::now();
        report.phases.shuffle_s = seconds(reduce_start - shuffle_start);
        report.phases.reduce_s = seconds(reduce_end - reduce_start);
    }
    report.wall_time_s = seconds(Clock::now() - wall_start);
    out.tasks = std::move(results);
    return out;
}

} // namespace

BenchReport run_count_map(const std::filesystem::path& container, const CodecRegistry& registry,
                          const BenchConfig& config, std::vector<MapTaskResult>* tasks)
{
    auto out = run_job(container, registry, config, false);
    if (tasks) {
        *tasks = std::move(out.tasks);
    }
    return out.report;
}

BenchReport run_count_mapreduce(const std::filesystem::path& container, const CodecRegistry& registry,
                                const BenchConfig& config, std::vector<MapTaskResult>* tasks)
{
    auto out = run_job(container, registry, config, true);
    if (tasks) {
        *tasks = std::move(out.tasks);
    }
    return out.report;
}

std::vector<BlockCountRow> run_block_count_report(const std::filesystem::path& directory,
                                                  const CodecRegistry& registry, std::uint64_t hdfs_block_size)
{
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (auto it = std::filesystem::directory_iterator(directory, ec); !ec && it != std::filesystem::directory_iterator();
         it.increment(ec)) {
        if (it->is_regular_file()) {
            files.push_back(it->path());
        }
    }
    if (ec) {
        raise(ErrorKind::IoFailure, "cannot list " + directory.string() + ": " + ec.message());
    }
    std::sort(files.begin(), files.end());

    std::vector<BlockCountRow> rows;
    for (const auto& file : files) {
        BlockCountRow row;
        row.file = file.filename().string();
        row.codec = "none";
        try {
            row.file_length = std::filesystem::file_size(file);
            row.hdfs_block_count = hdfs_block_count(row.file_length, hdfs_block_size);
            std::ifstream in(file, std::ios::binary);
            std::string magic(kHeaderMagic.size(), '\0');
            in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
            if (in && magic == kHeaderMagic) {
                auto info = read_index(file);
                try {
                    row.codec = std::string(registry.resolve(info.header.codec_id)->name());
                } catch (const Error&) {
                    row.codec = "codec-" + std::to_string(to_underlying(info.header.codec_id));
                }
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const LetterCounts& counts)
{
    ordered_json out = ordered_json::object();
    for (std::size_t i = 0; i < counts.values.size(); ++i) {
        out[std::string(1, LetterCounts::kLetters[i])] = counts.values[i];
    }
    return out;
}

std::string fixed(double value, int precision)
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << value;
    return out.str();
}

} // namespace

std::string emit_report(const BenchReport& report, ReportFormat format)
{
    if (format == ReportFormat::json) {
        ordered_json j;
        j["dataset"] = report.dataset;
        j["codec"] = report.codec;
        j["strategy"] = report.strategy;
        j["emission"] = report.emission;
        j["workers"] = report.workers;
        j["hdfs_block_size"] = report.hdfs_block_size;
        j["hdfs_block_count"] = report.hdfs_block_count;
        j["block_count"] = report.block_count;
        j["split_count"] = report.split_count;
        j["map_task_count"] = report.map_task_count;
        j["reducer_count"] = report.reducer_count;
        j["letter_counts"] = to_json(report.letter_counts);
        j["records_processed"] = report.records_processed;
        j["compressed_bytes"] = report.compressed_bytes;
        j["bytes_read_local"] = report.bytes_read_local;
        j["bytes_read_remote"] = report.bytes_read_remote;
        j["predicted_remote_bytes"] = report.predicted_remote_bytes;
        j["exceptional_blocks"] = report.exceptional_blocks;
        j["shuffle_records"] = report.shuffle_records;
        j["shuffle_bytes"] = report.shuffle_bytes;
        j["timing"] = {
            {"wall_s", report.wall_time_s},
            {"read_s", report.phases.read_s},
            {"decompress_s", report.phases.decompress_s},
            {"map_s", report.phases.map_s},
            {"shuffle_s", report.phases.shuffle_s},
            {"reduce_s", report.phases.reduce_s},
        };
        return j.dump(2) + "\n";
    }

    std::ostringstream out;
    out << "dataset " << report.dataset << " (codec " << report.codec << ", " << report.strategy << " splits, "
        << report.workers << " workers)\n";
    out << report.hdfs_block_count << " hdfs blocks of " << report.hdfs_block_size << " bytes, " << report.block_count
        << " compressed blocks, " << report.split_count << " splits\n";
    out << report.map_task_count << " map tasks, " << report.reducer_count << " reducers\n";
    out << "letters";
    for (std::size_t i = 0; i < report.letter_counts.values.size(); ++i) {
        out << ' ' << LetterCounts::kLetters[i] << '=' << report.letter_counts.values[i];
    }
    out << " (" << report.records_processed << " records)\n";
    out << "read " << report.bytes_read_local << " local + " << report.bytes_read_remote << " remote bytes ("
        << report.predicted_remote_bytes << " remote predicted, " << report.exceptional_blocks
        << " exceptional blocks)\n";
    out << "shuffle " << report.shuffle_records << " records, " << report.shuffle_bytes << " bytes\n";
    double rate = report.wall_time_s > 0 ? static_cast<double>(report.compressed_bytes) / report.wall_time_s / 1e6 : 0.0;
    double per_task = report.map_task_count > 0 ? report.wall_time_s / static_cast<double>(report.map_task_count) : 0.0;
    out << "wall " << fixed(report.wall_time_s, 3) << " s, " << fixed(rate, 1) << " MB/s compressed, "
        << fixed(per_task * 1e3, 3) << " ms per map task\n";
    out << "phases read " << fixed(report.phases.read_s, 3) << " s, decompress " << fixed(report.phases.decompress_s, 3)
        << " s, map " << fixed(report.phases.map_s, 3) << " s, shuffle " << fixed(report.phases.shuffle_s, 3)
        << " s, reduce " << fixed(report.phases.reduce_s, 3) << " s\n";
    return out.str();
}

BenchReport parse_report_json(std::string_view text)
{
    try {
        auto j = nlohmann::json::parse(text);
        BenchReport report;
        report.dataset = j.at("dataset").get<std::string>();
        report.codec = j.at("codec").get<std::string>();
        report.strategy = j.at("strategy").get<std::string>();
        report.emission = j.at("emission").get<std::string>();
        report.workers = j.at("workers").get<std::uint64_t>();
        report.hdfs_block_size = j.at("hdfs_block_size").get<std::uint64_t>();
        report.hdfs_block_count = j.at("hdfs_block_count").get<std::uint64_t>();
        report.block_count = j.at("block_count").get<std::uint64_t>();
        report.split_count = j.at("split_count").get<std::uint64_t>();
        report.map_task_count = j.at("map_task_count").get<std::uint64_t>();
        report.reducer_count = j.at("reducer_count").get<std::uint64_t>();
        for (std::size_t i = 0; i < report.letter_counts.values.size(); ++i) {
            report.letter_counts.values[i] =
                j.at("letter_counts").at(std::string(1, LetterCounts::kLetters[i])).get<std::uint64_t>();
        }
        report.records_processed = j.at("records_processed").get<std::uint64_t>();
        report.compressed_bytes = j.at("compressed_bytes").get<std::uint64_t>();
        report.bytes_read_local = j.at("bytes_read_local").get<std::uint64_t>();
        report.bytes_read_remote = j.at("bytes_read_remote").get<std::uint64_t>();
        report.predicted_remote_bytes = j.at("predicted_remote_bytes").get<std::uint64_t>();
        report.exceptional_blocks = j.at("exceptional_blocks").get<std::uint64_t>();
        report.shuffle_records = j.at("shuffle_records").get<std::uint64_t>();
        report.shuffle_bytes = j.at("shuffle_bytes").get<std::uint64_t>();
        const auto& timing = j.at("timing");
        report.wall_time_s = timing.at("wall_s").get<double>();
        report.phases.read_s = timing.at("read_s").get<double>();
        report.phases.decompress_s = timing.at("decompress_s").get<double>();
        report.phases.map_s = timing.at("map_s").get<double>();
        report.phases.shuffle_s = timing.at("shuffle_s").get<double>();
        report.phases.reduce_s = timing.at("reduce_s").get<double>();
        return report;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::BadValue, std::string("malformed report: ") + e.what());
    }
}

std::string emit_block_count_report(const std::vector<BlockCountRow>& rows, ReportFormat format)
{
    if (format == ReportFormat::json) {
        ordered_json j = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json entry;
            entry["file"] = row.file;
            entry["codec"] = row.codec;
            entry["file_length"] = row.file_length;
            entry["hdfs_block_count"] = row.hdfs_block_count;
            if (!row.error.empty()) {
                entry["error"] = row.error;
            }
            j.push_back(std::move(entry));
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        out << row.file << '\t' << row.codec << '\t' << row.file_length << '\t' << row.hdfs_block_count;
        if (!row.error.empty()) {
            out << "\terror: " << row.error;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace splitcodec
