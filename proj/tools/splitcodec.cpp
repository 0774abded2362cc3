// splitcodec: command-line front end for block-indexed splittable containers.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "splitcodec/codec.hpp"
#include "splitcodec/container.hpp"
#include "splitcodec/error.hpp"
#include "splitcodec/external_codec.hpp"
#include "splitcodec/harness.hpp"
#include "splitcodec/record_io.hpp"
#include "splitcodec/split_planner.hpp"

namespace fs = std::filesystem;
using namespace splitcodec;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CliConfig {
    std::string codec = "store";
    std::string codec_config;
    std::uint64_t target_block_size = kDefaultTargetBlockSize;
    LayoutParams layout;
    std::string strategy = "enhanced";
    std::size_t workers = 1;
    std::size_t reducers = 1;
    std::string emission = "per-task";
    std::string format = "auto";
    std::uint64_t seed = 0;
    bool json = false;
};

CodecRegistry load_registry(const CliConfig& config)
{
    std::string path = config.codec_config;
    if (path.empty()) {
        if (const char* env = std::getenv("SPLITCODEC_CONFIG"); env != nullptr) {
            path = env;
        }
    }
    if (path.empty()) {
        return CodecRegistry{};
    }
    return make_registry(load_codec_config(path));
}

/// Writes to a sibling temp file and renames it into place on commit; the temp is removed otherwise.
class AtomicOutput {
public:
    explicit AtomicOutput(fs::path target) : target_(std::move(target))
    {
        std::random_device device;
        temp_ = target_;
        temp_ += ".tmp-" + std::to_string(device());
        stream_.open(temp_, std::ios::binary | std::ios::trunc);
        if (!stream_) {
            raise(ErrorKind::IoFailure, "cannot create " + temp_.string());
        }
    }
    ~AtomicOutput()
    {
        if (!committed_) {
            stream_.close();
            std::error_code ec;
            fs::remove(temp_, ec);
        }
    }
    AtomicOutput(const AtomicOutput&) = delete;
    AtomicOutput& operator=(const AtomicOutput&) = delete;

    std::ofstream& stream() { return stream_; }

    void commit()
    {
        stream_.close();
        if (!stream_) {
            raise(ErrorKind::IoFailure, "failed to finish " + temp_.string());
        }
        std::error_code ec;
        fs::rename(temp_, target_, ec);
        if (ec) {
            raise(ErrorKind::IoFailure, "cannot rename into " + target_.string() + ": " + ec.message());
        }
        committed_ = true;
    }

private:
    fs::path target_;
    fs::path temp_;
    std::ofstream stream_;
    bool committed_ = false;
};

std::ifstream open_input(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    return in;
}

int cmd_compress(const fs::path& in_path, const fs::path& out_path, const CliConfig& config)
{
    auto start = std::chrono::steady_clock::now();
    auto registry = load_registry(config);
    auto codec = registry.resolve_spec(config.codec);
    auto format = config.format == "auto" ? infer_record_format(in_path) : parse_record_format(config.format);

    ChunkPlan plan;
    {
        auto in = open_input(in_path);
        plan = plan_chunks(in, format, config.target_block_size);
    }

    ContainerOptions options;
    options.target_block_size = config.target_block_size;
    if (format != RecordFormat::raw) {
        options.flags |= flags::record_aligned;
        options.flags |= format == RecordFormat::fastq ? flags::fastq : flags::fasta;
    }

    AtomicOutput out(out_path);
    ContainerWriter writer(out.stream(), *codec, options);
    auto in = open_input(in_path);
    std::string chunk;
    for (std::size_t i = 1; i < plan.boundaries.size(); ++i) {
        chunk.resize(plan.boundaries[i] - plan.boundaries[i - 1]);
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        if (static_cast<std::size_t>(in.gcount()) != chunk.size()) {
            raise(ErrorKind::IoFailure, in_path.string() + " changed while compressing");
        }
        writer.append(chunk);
    }
    auto index = writer.finish();
    out.commit();

    auto input_bytes = plan.boundaries.back();
    auto output_bytes = container_length(index);
    double ratio = output_bytes > 0 ? static_cast<double>(input_bytes) / static_cast<double>(output_bytes) : 0.0;
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("compressed %s -> %s: %llu blocks, %llu -> %llu bytes, ratio %.4f, %.3f s\n", in_path.c_str(),
                out_path.c_str(), static_cast<unsigned long long>(index.block_count()),
                static_cast<unsigned long long>(input_bytes), static_cast<unsigned long long>(output_bytes), ratio,
                elapsed);
    return 0;
}

int cmd_decompress(const fs::path& in_path, const fs::path& out_path, const CliConfig& config)
{
    auto registry = load_registry(config);
    auto in = open_input(in_path);
    auto info = read_index(in);
    auto codec = registry.resolve(info.header.codec_id);

    AtomicOutput out(out_path);
    for (const auto& ref : info.refs) {
        auto plain = read_block(in, ref, *codec);
        out.stream().write(plain.data(), static_cast<std::streamsize>(plain.size()));
        if (!out.stream()) {
            raise(ErrorKind::IoFailure, "failed writing block " + std::to_string(ref.ordinal));
        }
    }
    out.commit();
    return 0;
}

int cmd_inspect(const fs::path& in_path, const CliConfig& config)
{
    auto info = read_index(in_path);
    std::optional<std::string> codec_name;
    try {
        codec_name = std::string(load_registry(config).resolve(info.header.codec_id)->name());
    } catch (const Error&) {
    }

    ordered_json j;
    j["file"] = in_path.string();
    j["file_length"] = info.file_length;
    j["version"] = info.header.version;
    j["codec_id"] = to_underlying(info.header.codec_id);
    j["codec"] = codec_name ? ordered_json(*codec_name) : ordered_json(nullptr);
    j["flags"] = {{"record_aligned", info.header.record_aligned()},
                  {"fastq", info.header.fastq()},
                  {"fasta", info.header.fasta()}};
    j["target_block_size"] = info.index.target_block_size;
    j["block_count"] = info.index.block_count();
    j["compressed_sizes"] = info.index.compressed_sizes;
    j["uncompressed_sizes"] = info.index.uncompressed_sizes;
    j["blocks"] = ordered_json::array();
    for (const auto& ref : info.refs) {
        j["blocks"].push_back({{"ordinal", ref.ordinal},
                               {"offset", ref.offset},
                               {"compressed_len", ref.compressed_len},
                               {"uncompressed_len", ref.uncompressed_len}});
    }
    if (config.json) {
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << in_path.string() << ": " << info.file_length << " bytes, codec "
              << codec_name.value_or("#" + std::to_string(to_underlying(info.header.codec_id))) << ", "
              << info.index.block_count() << " blocks, target " << info.index.target_block_size << " bytes\n";
    for (const auto& ref : info.refs) {
        std::cout << "  block " << ref.ordinal << " @" << ref.offset << " " << ref.compressed_len << " -> "
                  << ref.uncompressed_len << '\n';
    }
    return 0;
}

int cmd_plan(const fs::path& in_path, const CliConfig& config)
{
    auto info = read_index(in_path);
    auto layout = layout_file(info.file_length, config.layout);
    auto strategy = parse_split_strategy(config.strategy);
    auto splits = plan_splits(info.index, layout, strategy);

    ordered_json j;
    j["file"] = in_path.string();
    j["file_length"] = info.file_length;
    j["hdfs_block_size"] = layout.hdfs_block_size;
    j["hdfs_block_count"] = layout.blocks.size();
    j["strategy"] = std::string(to_string(strategy));
    j["block_count"] = info.index.block_count();
    j["split_count"] = splits.size();
    j["splits"] = ordered_json::array();
    std::uint64_t total_remote = 0;
    for (const auto& split : splits) {
        ordered_json entry;
        entry["ordinal"] = split.ordinal;
        entry["anchor_hdfs_block"] = *split.anchor_hdfs_block;
        entry["anchor_node"] = layout.blocks[*split.anchor_hdfs_block].home();
        entry["blocks"] = ordered_json::array();
        entry["exceptional"] = ordered_json::array();
        std::uint64_t remote = 0;
        for (const auto& ref : split.member_blocks) {
            entry["blocks"].push_back(ref.ordinal);
            auto resolution = resolve_block(ref, layout);
            remote += resolution.remote_bytes;
            if (resolution.kind == ResolutionKind::exceptional) {
                ordered_json parts = ordered_json::array();
                for (const auto& part : resolution.parts) {
                    parts.push_back({{"offset", part.offset},
                                     {"length", part.length},
                                     {"hdfs_block", part.hdfs_block},
                                     {"home_node", part.home_node},
                                     {"remote", part.remote}});
                }
                entry["exceptional"].push_back(
                    {{"block", ref.ordinal}, {"parts", parts}, {"remote_bytes", resolution.remote_bytes}});
            }
        }
        entry["remote_bytes"] = remote;
        total_remote += remote;
        j["splits"].push_back(std::move(entry));
    }
    j["remote_bytes"] = total_remote;

    if (config.json) {
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << splits.size() << " " << to_string(strategy) << " splits over " << layout.blocks.size()
              << " hdfs blocks, " << total_remote << " remote bytes\n";
    for (const auto& entry : j["splits"]) {
        std::cout << "  split " << entry["ordinal"] << " anchor " << entry["anchor_hdfs_block"] << " blocks "
                  << entry["blocks"].dump() << " exceptional " << entry["exceptional"].size() << '\n';
    }
    return 0;
}

int cmd_gen(const std::string& format_text, std::uint64_t reads, std::uint64_t length, std::uint64_t seed,
            const std::string& out_path)
{
    auto format = parse_record_format(format_text);
    if (out_path.empty() || out_path == "-") {
        write_synthetic_dataset(std::cout, format, reads, length, seed);
        std::cout.flush();
        return 0;
    }
    AtomicOutput out(out_path);
    write_synthetic_dataset(out.stream(), format, reads, length, seed);
    out.commit();
    return 0;
}

BenchConfig bench_config(const CliConfig& config)
{
    BenchConfig bench;
    bench.layout = config.layout;
    bench.strategy = parse_split_strategy(config.strategy);
    bench.workers = config.workers;
    bench.reducers = config.reducers;
    bench.emission = parse_emission_mode(config.emission);
    return bench;
}

void add_layout_options(CLI::App* cmd, CliConfig& config)
{
    cmd->add_option("--hdfs-block-size", config.layout.hdfs_block_size, "Simulated physical block size in bytes");
    cmd->add_option("--nodes", config.layout.node_count, "Simulated node count");
    cmd->add_option("--replication", config.layout.replication, "Replicas per physical block");
    cmd->add_option("--seed", config.layout.seed, "Seed for home-node placement");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Block-indexed splittable compression toolkit"};
    app.require_subcommand(1);
    CliConfig config;
    std::string in_path;
    std::string out_path;

    app.add_option("--config", config.codec_config, "Codec configuration file (uc.<name>.* properties)");

    auto* compress = app.add_subcommand("compress", "Compress a file into a container");
    compress->add_option("input", in_path)->required();
    compress->add_option("output", out_path)->required();
    compress->add_option("--codec", config.codec, "Codec name or id");
    compress->add_option("--block-size", config.target_block_size, "Target uncompressed block size in bytes");
    compress->add_option("--format", config.format, "auto, raw, fasta or fastq");
    compress->add_option("--config", config.codec_config, "Codec configuration file");

    auto* decompress = app.add_subcommand("decompress", "Restore the original file from a container");
    decompress->add_option("input", in_path)->required();
    decompress->add_option("output", out_path)->required();
    decompress->add_option("--config", config.codec_config, "Codec configuration file");

    auto* inspect = app.add_subcommand("inspect", "Dump a container's header and index");
    inspect->add_option("input", in_path)->required();
    inspect->add_flag("--json", config.json);
    inspect->add_option("--config", config.codec_config, "Codec configuration file");

    auto* plan = app.add_subcommand("plan", "Show input splits for a container");
    plan->add_option("input", in_path)->required();
    plan->add_option("--strategy", config.strategy, "per-block or enhanced");
    add_layout_options(plan, config);
    plan->add_flag("--json", config.json);

    std::string gen_format = "fastq";
    std::uint64_t gen_reads = 1000;
    std::uint64_t gen_length = 151;
    std::uint64_t gen_seed = 42;
    auto* gen = app.add_subcommand("gen", "Write a synthetic FASTA/FASTQ dataset");
    gen->add_option("--format", gen_format, "fasta or fastq");
    gen->add_option("--reads", gen_reads, "Number of reads");
    gen->add_option("--length", gen_length, "Read length");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("-o,--output", out_path, "Output file (default stdout)");

    auto* bench = app.add_subcommand("bench", "Desk-scale map/reduce benchmarks");
    bench->require_subcommand(1);
    auto* count_map = bench->add_subcommand("count-map", "Map-only letter count");
    auto* count_mapreduce = bench->add_subcommand("count-mapreduce", "Letter count with shuffle and reduce");
    for (auto* cmd : {count_map, count_mapreduce}) {
        cmd->add_option("input", in_path)->required();
        cmd->add_option("--strategy", config.strategy, "per-block or enhanced");
        cmd->add_option("--workers", config.workers, "Worker lanes");
        cmd->add_option("--config", config.codec_config, "Codec configuration file");
        add_layout_options(cmd, config);
        cmd->add_flag("--json", config.json);
    }
    count_mapreduce->add_option("--reducers", config.reducers, "Reducer count");
    count_mapreduce->add_option("--emission", config.emission, "per-task or per-sequence");
    auto* block_count = bench->add_subcommand("block-count", "Physical block counts for every file in a directory");
    block_count->add_option("directory", in_path)->required();
    block_count->add_option("--hdfs-block-size", config.layout.hdfs_block_size, "Physical block size in bytes");
    block_count->add_option("--config", config.codec_config, "Codec configuration file");
    block_count->add_flag("--json", config.json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*compress) return cmd_compress(in_path, out_path, config);
        if (*decompress) return cmd_decompress(in_path, out_path, config);
        if (*inspect) return cmd_inspect(in_path, config);
        if (*plan) return cmd_plan(in_path, config);
        if (*gen) return cmd_gen(gen_format, gen_reads, gen_length, gen_seed, out_path);
        auto format = config.json ? ReportFormat::json : ReportFormat::text;
        if (*count_map) {
            std::cout << emit_report(run_count_map(in_path, load_registry(config), bench_config(config)), format);
            return 0;
        }
        if (*count_mapreduce) {
            std::cout << emit_report(run_count_mapreduce(in_path, load_registry(config), bench_config(config)), format);
            return 0;
        }
        if (*block_count) {
            auto rows = run_block_count_report(in_path, load_registry(config), config.layout.hdfs_block_size);
            std::cout << emit_block_count_report(rows, format);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
