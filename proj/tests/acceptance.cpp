// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "splitcodec/container.hpp"
#include "splitcodec/error.hpp"
#include "splitcodec/external_codec.hpp"
#include "splitcodec/harness.hpp"
#include "splitcodec/record_io.hpp"
#include "splitcodec/split_planner.hpp"
#include "test_support.hpp"

using namespace splitcodec;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t KiB = 1024;
constexpr std::uint64_t MiB = KiB * KiB;
constexpr std::uint64_t GiB = MiB * KiB;

/// Collects failed checks for one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what)
    {
        ++count_;
        if (!ok && failures_.size() < 10) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    template <typename A, typename B>
    void equal(const A& actual, const B& expected, const std::string& what)
    {
        if (actual == expected) {
            expect(true, what);
            return;
        }
        std::ostringstream msg;
        msg << what << ": got " << actual << ", expected " << expected;
        expect(false, msg.str());
    }
    [[nodiscard]] bool ok() const { return failed_ == 0; }
    [[nodiscard]] std::size_t count() const { return count_; }
    [[nodiscard]] const std::vector<std::string>& failures() const { return failures_; }

private:
    std::size_t count_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
};

std::uint16_t flags_for(RecordFormat format)
{
    switch (format) {
    case RecordFormat::fastq: return flags::record_aligned | flags::fastq;
    case RecordFormat::fasta: return flags::record_aligned | flags::fasta;
    case RecordFormat::raw: break;
    }
    return 0;
}

ContainerIndex compress_to_file(const fs::path& path, std::string_view data, const BlockCodec& codec,
                                RecordFormat format, std::uint64_t target)
{
    auto plan = plan_chunks(data, format, target);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    auto index = write_container(data, codec, plan.boundaries, out, ContainerOptions{flags_for(format), target});
    out.close();
    if (!out) throw std::runtime_error("write failed: " + path.string());
    return index;
}

std::string decompress_file(const fs::path& path, const CodecRegistry& registry)
{
    std::ifstream in(path, std::ios::binary);
    auto info = read_index(in);
    auto codec = registry.resolve(info.header.codec_id);
    std::string out;
    out.reserve(info.file_length);
    for (const auto& ref : info.refs) out += read_block(in, ref, *codec);
    return out;
}

/// Synthetic data of roughly `size` bytes in the given format.
std::string dataset_of_size(RecordFormat format, std::uint64_t size, std::mt19937_64& rng)
{
    if (size == 0) return {};
    if (format == RecordFormat::raw) return test::random_bytes(rng, size, test::Alphabet::binary);
    if (size == 1) {
        // One byte holds a complete FASTA record (empty header, no sequence) but no FASTQ record.
        return format == RecordFormat::fasta ? ">" : "@r\nA\n+\nI\n";
    }
    std::uint64_t read_length = format == RecordFormat::fastq ? 151 : 100;
    std::uint64_t record_bytes = format == RecordFormat::fastq ? 2 * read_length + 26 : read_length + 14;
    return make_synthetic_dataset(format, std::max<std::uint64_t>(1, size / record_bytes), read_length, rng()).data;
}

void ac1_round_trip(Checks& c, const fs::path& dir)
{
    CodecRegistry registry;
    std::mt19937_64 rng(101);
    const std::vector<std::uint64_t> sizes = {0, 1, 64 * KiB, 10 * MiB, 100 * MiB};
    for (auto format : {RecordFormat::raw, RecordFormat::fasta, RecordFormat::fastq}) {
        for (auto size : sizes) {
            auto data = dataset_of_size(format, size, rng);
            for (auto id : {CodecId::store, CodecId::rle1}) {
                auto codec = registry.resolve(id);
                auto path = dir / "ac1.hsc";
                compress_to_file(path, data, *codec, format, kDefaultTargetBlockSize);
                bool same = decompress_file(path, registry) == data;
                c.expect(same, std::string(codec->name()) + "/" + std::string(to_string(format)) + "/" +
                                   std::to_string(size) + " bytes round trip");
                fs::remove(path);
            }
        }
    }
}

void ac2_block_arithmetic(Checks& c, const fs::path& dir)
{
    const std::vector<std::pair<std::uint64_t, std::uint64_t>> table = {
        {16 * GiB, 128}, {32 * GiB, 256}, {64 * GiB, 512}, {96 * GiB, 768}};
    for (auto [length, expected] : table) {
        c.equal(layout_file(length, 128 * MiB, 8, 1, 0).blocks.size(), expected,
                std::to_string(length / GiB) + " GiB layout");
        c.equal(hdfs_block_count(length, 128 * MiB), expected, std::to_string(length / GiB) + " GiB count");
    }

    // Written out in full, not sparse.
    auto sub = dir / "ac2";
    fs::create_directories(sub);
    {
        std::ofstream out(sub / "one_gib.raw", std::ios::binary);
        std::string chunk(8 * MiB, 'A');
        for (int i = 0; i < 128; ++i) out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    }
    c.equal(fs::file_size(sub / "one_gib.raw"), GiB, "materialized size");
    CodecRegistry registry;
    auto rows = run_block_count_report(sub, registry, 8 * MiB);
    c.equal(rows.size(), 1u, "report rows");
    if (!rows.empty()) c.equal(rows[0].hdfs_block_count, 128u, "1 GiB at 8 MiB blocks");
    c.equal(layout_file(fs::file_size(sub / "one_gib.raw"), 8 * MiB, 8, 1, 0).blocks.size(), 128u,
            "1 GiB layout");
    fs::remove_all(sub);
}

void ac3_straddle(Checks& c, const fs::path& dir)
{
    // Chunk sizes put block starts at 16, 500 | 1000, 1400, 1700 | 2300 | 3000, 3300 across
    // 1000-byte physical blocks; block 4 covers [1700, 2300).
    const std::vector<std::uint64_t> chunk_sizes = {484, 500, 400, 300, 600, 700, 300, 300};
    std::vector<std::uint64_t> boundaries{0};
    for (auto s : chunk_sizes) boundaries.push_back(boundaries.back() + s);
    std::mt19937_64 rng(3);
    auto data = test::random_bytes(rng, boundaries.back(), test::Alphabet::nucleotide);
    auto path = dir / "ac3.hsc";
    {
        std::ofstream out(path, std::ios::binary);
        (void)write_container(data, StoreCodec(), boundaries, out, ContainerOptions{0, 1000});
    }
    auto info = read_index(path);
    auto layout = layout_file(info.file_length, 1000, 4, 1, 0);
    c.equal(layout.blocks.size(), 4u, "physical blocks");
    c.equal(info.index.block_count(), 8u, "compressed blocks");

    auto per_block = plan_splits(info.index, layout, SplitStrategy::per_block);
    auto enhanced = plan_splits(info.index, layout, SplitStrategy::enhanced);
    c.equal(per_block.size(), 8u, "per-block splits");
    c.equal(enhanced.size(), 4u, "enhanced splits");

    std::size_t exceptional = 0;
    for (const auto& ref : info.refs) {
        auto r = resolve_block(ref, layout);
        if (r.kind == ResolutionKind::exceptional) {
            ++exceptional;
            c.equal(ref.ordinal, 4u, "straddling block ordinal");
            c.equal(r.parts.size(), 2u, "straddling parts");
            if (r.parts.size() == 2) {
                c.equal(r.parts[0].offset, 1700u, "p1 offset");
                c.equal(r.parts[0].length, 300u, "p1 length");
                c.equal(r.parts[1].offset, 2000u, "p2 offset");
                c.equal(r.parts[1].length, 300u, "p2 length");
            }
        }
    }
    c.equal(exceptional, 1u, "exceptional blocks");
    if (enhanced.size() == 4) {
        c.equal(enhanced[1].member_blocks.back().ordinal, 4u, "straddler joins the split of its start");
    }
}

void ac4_coverage(Checks& c)
{
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        ContainerIndex index;
        std::size_t n = rng() % 64;
        for (std::size_t i = 0; i < n; ++i) {
            auto s = 1 + rng() % (rng() % 3 == 0 ? 20000 : 500);
            index.compressed_sizes.push_back(s);
            index.uncompressed_sizes.push_back(s);
        }
        index.target_block_size = 20000;
        auto length = container_length(index);
        auto layout = layout_file(length, 1 + rng() % 8000, 1 + static_cast<std::uint32_t>(rng() % 8), 1, rng());

        for (auto strategy : {SplitStrategy::per_block, SplitStrategy::enhanced}) {
            auto splits = plan_splits(index, layout, strategy);
            // Brute force: every ordinal exactly once, consecutive within a split, and (enhanced)
            // grouped by the physical block of its first byte.
            std::vector<int> seen(n, 0);
            bool consecutive = true;
            bool anchored = true;
            for (const auto& split : splits) {
                if (split.member_blocks.empty()) consecutive = false;
                for (std::size_t k = 0; k < split.member_blocks.size(); ++k) {
                    const auto& b = split.member_blocks[k];
                    if (b.ordinal < n) ++seen[b.ordinal];
                    if (k > 0 && b.ordinal != split.member_blocks[k - 1].ordinal + 1) consecutive = false;
                    if (strategy == SplitStrategy::enhanced &&
                        b.offset / layout.hdfs_block_size != split.anchor_hdfs_block.value_or(~0ull)) {
                        anchored = false;
                    }
                }
            }
            bool exactly_once = std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; });
            std::string tag = "trial " + std::to_string(trial) + " " + std::string(to_string(strategy));
            c.expect(exactly_once, tag + ": each block in exactly one split");
            c.expect(consecutive, tag + ": consecutive members");
            c.expect(anchored, tag + ": anchors");
            if (strategy == SplitStrategy::per_block) c.equal(splits.size(), n, tag + ": split count");
            if (strategy == SplitStrategy::enhanced) {
                std::set<std::uint64_t> anchors;
                std::uint64_t offset = kHeaderSize;
                for (auto s : index.compressed_sizes) {
                    anchors.insert(offset / layout.hdfs_block_size);
                    offset += s;
                }
                c.equal(splits.size(), anchors.size(), tag + ": split count");
            }
        }
    }
}

void ac5_parallel_equivalence(Checks& c, const fs::path& dir)
{
    std::uint64_t reads = 100 * MiB / (2 * 151 + 26);
    auto path = dir / "ac5.hsc";
    LetterCounts truth;
    {
        auto dataset = make_synthetic_dataset(RecordFormat::fastq, reads, 151, 5);
        c.expect(dataset.data.size() >= 99 * MiB, "dataset is about 100 MiB");
        truth = dataset.counts;
        compress_to_file(path, dataset.data, StoreCodec(), RecordFormat::fastq, 1 * MiB);
    }
    CodecRegistry registry;
    for (auto strategy : {SplitStrategy::per_block, SplitStrategy::enhanced}) {
        for (std::size_t workers : {1, 2, 4, 8}) {
            BenchConfig config;
            config.layout.hdfs_block_size = 4 * MiB;
            config.layout.node_count = 8;
            config.strategy = strategy;
            config.workers = workers;
            auto report = run_count_map(path, registry, config);
            std::string tag = std::string(to_string(strategy)) + " workers=" + std::to_string(workers);
            c.expect(report.letter_counts == truth, tag + ": counts equal ground truth");
            c.equal(report.records_processed, reads, tag + ": records");
        }
    }
    fs::remove(path);
}

void ac6_shuffle(Checks& c, const fs::path& dir)
{
    auto dataset = make_synthetic_dataset(RecordFormat::fastq, 20000, 151, 6);
    auto path = dir / "ac6.hsc";
    compress_to_file(path, dataset.data, Rle1Codec(), RecordFormat::fastq, 64 * KiB);
    CodecRegistry registry;
    std::map<SplitStrategy, BenchReport> reports;
    for (auto strategy : {SplitStrategy::per_block, SplitStrategy::enhanced}) {
        BenchConfig config;
        config.layout.hdfs_block_size = 1 * MiB;
        config.strategy = strategy;
        config.workers = 2;
        config.reducers = 4;
        auto report = run_count_mapreduce(path, registry, config);
        std::string tag(to_string(strategy));
        c.equal(report.shuffle_bytes, report.map_task_count * kEmittedRecordSize, tag + ": shuffle law");
        c.equal(report.map_task_count, report.split_count, tag + ": tasks = splits");
        c.expect(report.letter_counts == dataset.counts, tag + ": totals");
        reports[strategy] = report;
    }
    const auto& pb = reports[SplitStrategy::per_block];
    const auto& en = reports[SplitStrategy::enhanced];
    c.expect(en.split_count < pb.split_count, "enhanced yields fewer splits on this container");
    if (en.split_count < pb.split_count) {
        c.expect(en.shuffle_bytes <= pb.shuffle_bytes, "enhanced shuffle_bytes <= per-block");
    }
    fs::remove(path);
}

void ac7_adapter(Checks& c, const fs::path& dir)
{
    using Args = std::vector<std::string>;
    const std::string in = "/staging/in";
    const std::string out = "/staging/out";
    auto spec_of = [](const std::string& text) { return parse_codec_config(text).at(0); };

    auto spring = spec_of("uc.spring.compress.cmd=spring -c\nuc.spring.decompress.cmd=spring -d\n"
                          "uc.spring.io.input.flag=-i\nuc.spring.io.output.flag=-o\nuc.spring.compress.ext=.spring\n");
    c.expect(assemble_command(spring, Direction::compress, in, out).argv == Args{"spring", "-c", "-i", in, "-o", out},
             "SPRING-FASTQ argv");

    auto spring_fasta = spec_of("uc.sf.compress.cmd=spring -c --fasta-input\nuc.sf.decompress.cmd=spring -d\n"
                                "uc.sf.io.input.flag=-i\nuc.sf.io.output.flag=-o\nuc.sf.compress.ext=.spring\n"
                                "uc.sf.decompress.ext=.fasta\n");
    c.expect(assemble_command(spring_fasta, Direction::compress, in, out).argv ==
                 Args{"spring", "-c", "--fasta-input", "-i", in, "-o", out},
             "SPRING-FASTA argv");

    auto dsrc = spec_of("uc.dsrc.compress.cmd=dsrc c -t8\nuc.dsrc.decompress.cmd=dsrc d -t8\n");
    c.expect(assemble_command(dsrc, Direction::compress, in, out).argv == Args{"dsrc", "c", "-t8", in, out},
             "DSRC argv");

    auto fqz = spec_of("uc.fqz.compress.cmd=fqz_comp\nuc.fqz.decompress.cmd=fqz_comp -d\n");
    c.expect(assemble_command(fqz, Direction::compress, in, out).argv == Args{"fqz_comp", in, out}, "Fqzcomp argv");
    c.expect(assemble_command(fqz, Direction::decompress, in, out).argv == Args{"fqz_comp", "-d", in, out},
             "Fqzcomp decompress argv");

    auto mfc = spec_of("uc.mfc.compress.cmd=MFCompressC -t 8 -p 8\nuc.mfc.decompress.cmd=MFCompressD -t 8\n"
                       "uc.mfc.io.output.flag=-o\nuc.mfc.io.reverse=true\nuc.mfc.decompress.ext=.fasta\n");
    c.expect(assemble_command(mfc, Direction::compress, in, out).argv ==
                 Args{"MFCompressC", "-t", "8", "-p", "8", "-o", out, in},
             "MFCompress argv");

    // Live: gzip configured only through uc.* properties, driven through a container.
    auto staging = dir / "ac7-staging";
    fs::create_directories(staging);
    auto specs = parse_codec_config("uc.gz.compress.cmd=sh -c 'gzip -c -n \"$0\" > \"$1\"'\n"
                                    "uc.gz.decompress.cmd=sh -c 'gzip -d -c \"$0\" > \"$1\"'\n"
                                    "uc.gz.compress.ext=.gz\n");
    specs.at(0).staging_dir = staging;
    auto registry = make_registry(specs);
    auto data = make_synthetic_dataset(RecordFormat::fastq, 5000, 151, 7).data;
    auto path = dir / "ac7.hsc";
    auto index = compress_to_file(path, data, *registry.resolve("gz"), RecordFormat::fastq, 128 * KiB);
    c.expect(index.block_count() > 1, "several external blocks");
    c.expect(decompress_file(path, registry) == data, "gzip container round trip is byte-exact");
    c.equal(static_cast<std::size_t>(std::distance(fs::directory_iterator(staging), fs::directory_iterator())), 0u,
            "staging directory left empty");
    fs::remove_all(staging);
    fs::remove(path);
}

void ac8_golden(Checks& c)
{
    const fs::path golden = fs::path(SPLITCODEC_TEST_DATA_DIR) / "golden";

    auto rle_bytes = test::read_file(golden / "rle1_two_blocks.hsc");
    c.expect(rle_bytes == test::hand_built_container(1, 0, {std::string{'\x82', 'A'}, std::string{'\x02', 'A', 'B', 'C'}},
                                                     {4, 3}, 4),
             "rle1_two_blocks.hsc matches hand-assembled bytes");
    auto rle = read_index(golden / "rle1_two_blocks.hsc");
    c.expect(rle.index.compressed_sizes == std::vector<std::uint64_t>{2, 4}, "rle1 compressed sizes");
    c.expect(rle.index.uncompressed_sizes == std::vector<std::uint64_t>{4, 3}, "rle1 uncompressed sizes");
    {
        std::ostringstream rewritten;
        auto source = test::read_file(golden / "two_blocks.raw");
        (void)write_container(source, Rle1Codec(), std::vector<std::uint64_t>{0, 4, 7}, rewritten,
                              ContainerOptions{0, 4});
        c.expect(rewritten.str() == rle_bytes, "rle1 golden rewrites bit-exactly");
    }

    auto store_bytes = test::read_file(golden / "store_small_fastq.hsc");
    auto store = read_index(golden / "store_small_fastq.hsc");
    c.equal(store.file_length, 213u, "store golden length");
    c.equal(store.header.flags, flags::record_aligned | flags::fastq, "store golden flags");
    c.expect(store.index.compressed_sizes == std::vector<std::uint64_t>{86, 43}, "store golden sizes");
    c.equal(store.index.target_block_size, 64u, "store golden target");
    {
        auto source = test::read_file(golden / "small.fastq");
        std::ostringstream rewritten;
        (void)write_container(source, StoreCodec(), plan_chunks(source, RecordFormat::fastq, 64).boundaries, rewritten,
                              ContainerOptions{flags::record_aligned | flags::fastq, 64});
        c.expect(rewritten.str() == store_bytes, "store golden rewrites bit-exactly");
    }

    auto empty_bytes = test::read_file(golden / "empty_store.hsc");
    c.expect(empty_bytes == test::hand_built_container(0, 0, {}, {}, kDefaultTargetBlockSize),
             "empty_store.hsc matches hand-assembled bytes");
    c.equal(read_index(golden / "empty_store.hsc").index.block_count(), 0u, "empty golden blocks");
}

void ac9_remote_accounting(Checks& c, const fs::path& dir)
{
    auto dataset = make_synthetic_dataset(RecordFormat::fastq, 40000, 151, 9);
    auto path = dir / "ac9.hsc";
    auto index = compress_to_file(path, dataset.data, Rle1Codec(), RecordFormat::fastq, 64 * KiB);
    CodecRegistry registry;
    for (auto strategy : {SplitStrategy::per_block, SplitStrategy::enhanced}) {
        BenchConfig config;
        config.layout.hdfs_block_size = 100 * KiB;
        config.layout.node_count = 8;
        config.layout.replication = 1;
        config.strategy = strategy;
        config.workers = 4;
        auto report = run_count_map(path, registry, config);

        auto layout = layout_file(container_length(index), config.layout);
        std::uint64_t predicted = 0;
        std::uint64_t exceptional = 0;
        for (const auto& split : plan_splits(index, layout, strategy)) {
            for (const auto& block : split.member_blocks) {
                auto r = resolve_block(block, layout);
                predicted += r.remote_bytes;
                exceptional += r.kind == ResolutionKind::exceptional ? 1 : 0;
            }
        }
        std::string tag(to_string(strategy));
        c.expect(exceptional > 0, tag + ": some blocks straddle");
        c.equal(report.bytes_read_remote, predicted, tag + ": harness remote bytes = planner prediction");
        c.equal(report.predicted_remote_bytes, predicted, tag + ": reported prediction");
        c.equal(report.bytes_read_local + report.bytes_read_remote, report.compressed_bytes, tag + ": byte total");
        c.expect(report.letter_counts == dataset.counts, tag + ": counts");
    }
    fs::remove(path);
}

} // namespace

int main()
{
    test::TempDir dir;
    struct Criterion {
        const char* id;
        const char* title;
        std::function<void(Checks&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"AC1", "round-trip soundness, STORE/RLE1 x raw/fasta/fastq x 0 B..100 MiB",
         [&](Checks& c) { ac1_round_trip(c, dir.path()); }},
        {"AC2", "physical block counts 128/256/512/768 and 1 GiB at 8 MiB = 128",
         [&](Checks& c) { ac2_block_arithmetic(c, dir.path()); }},
        {"AC3", "8 compressed blocks over 4 physical blocks: 8 vs 4 splits, one two-part block",
         [&](Checks& c) { ac3_straddle(c, dir.path()); }},
        {"AC4", "split coverage over 1000 random instances", [&](Checks& c) { ac4_coverage(c); }},
        {"AC5", "letter counts on 100 MiB FASTQ identical for workers 1/2/4/8, both strategies",
         [&](Checks& c) { ac5_parallel_equivalence(c, dir.path()); }},
        {"AC6", "shuffle bytes proportional to map tasks", [&](Checks& c) { ac6_shuffle(c, dir.path()); }},
        {"AC7", "external adapter argv goldens and live gzip round trip",
         [&](Checks& c) { ac7_adapter(c, dir.path()); }},
        {"AC8", "golden container files parse and rewrite bit-exactly", [&](Checks& c) { ac8_golden(c); }},
        {"AC9", "remote bytes with 64 KiB chunks on 100 KiB physical blocks match prediction",
         [&](Checks& c) { ac9_remote_accounting(c, dir.path()); }},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        Checks checks;
        auto started = std::chrono::steady_clock::now();
        std::string crash;
        try {
            criterion.run(checks);
        } catch (const std::exception& e) {
            crash = e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        bool ok = crash.empty() && checks.ok();
        failed += ok ? 0 : 1;
        std::printf("%s %s: %s (%zu checks, %.1f s)\n", ok ? "PASS" : "FAIL", criterion.id, criterion.title,
                    checks.count(), seconds);
        if (!crash.empty()) std::printf("    exception: %s\n", crash.c_str());
        for (const auto& f : checks.failures()) std::printf("    %s\n", f.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
