#include <array>
#include <cstdio>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "splitcodec/container.hpp"
#include "splitcodec/record_io.hpp"
#include "test_support.hpp"

using namespace splitcodec;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

/// Runs the CLI with `args` (already shell-quoted), capturing stdout and stderr together.
CliResult cli(const std::string& args)
{
    std::string command = quote(SPLITCODEC_CLI) + " " + args + " 2>&1";
    CliResult result;
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) return result;
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) result.output.append(buffer.data(), n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

} // namespace

TEST(Cli, GenIsDeterministic)
{
    test::TempDir dir;
    auto a = dir / "a.fastq";
    auto b = dir / "b.fastq";
    ASSERT_EQ(cli("gen --format fastq --reads 250 --length 151 --seed 42 -o " + quote(a)).exit_code, 0);
    ASSERT_EQ(cli("gen --format fastq --reads 250 --length 151 --seed 42 -o " + quote(b)).exit_code, 0);
    EXPECT_EQ(test::read_file(a), test::read_file(b));
    EXPECT_EQ(test::read_file(a), make_synthetic_dataset(RecordFormat::fastq, 250, 151, 42).data);

    auto to_stdout = cli("gen --format fasta --reads 3 --length 70 --seed 7");
    EXPECT_EQ(to_stdout.exit_code, 0);
    EXPECT_EQ(to_stdout.output, make_synthetic_dataset(RecordFormat::fasta, 3, 70, 7).data);
}

TEST(Cli, RoundTripForEveryCodec)
{
    test::TempDir dir;
    auto config = dir / "codecs.conf";
    test::write_file(config, "uc.gz.compress.cmd=sh -c 'gzip -c -n \"$0\" > \"$1\"'\n"
                             "uc.gz.decompress.cmd=sh -c 'gzip -d -c \"$0\" > \"$1\"'\n"
                             "uc.gz.compress.ext=.gz\n");
    auto input = dir / "reads.fastq";
    ASSERT_EQ(cli("gen --format fastq --reads 2000 --length 151 --seed 3 -o " + quote(input)).exit_code, 0);
    auto original = test::read_file(input);

    for (std::string codec : {"store", "rle1", "gz", "0", "1000"}) {
        auto packed = dir / ("packed-" + codec + ".hsc");
        auto restored = dir / ("restored-" + codec + ".fastq");
        auto c = cli("--config " + quote(config) + " compress --codec " + codec + " --block-size 65536 " +
                     quote(input) + " " + quote(packed));
        ASSERT_EQ(c.exit_code, 0) << c.output;
        auto d = cli("--config " + quote(config) + " decompress " + quote(packed) + " " + quote(restored));
        ASSERT_EQ(d.exit_code, 0) << d.output;
        EXPECT_TRUE(test::read_file(restored) == original) << codec;

        auto info = read_index(packed);
        EXPECT_EQ(info.header.flags, flags::record_aligned | flags::fastq) << codec;
        EXPECT_GT(info.index.block_count(), 1u);
    }
}

TEST(Cli, UnknownCodecFailsCleanly)
{
    test::TempDir dir;
    auto input = dir / "x.raw";
    test::write_file(input, "ACGT");
    auto out = dir / "x.hsc";
    auto r = cli("compress --codec nosuch " + quote(input) + " " + quote(out));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_EQ(r.output.rfind("error:", 0), 0u) << r.output;
    EXPECT_NE(r.output.find("UnknownCodec"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(out));
    EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator()), 1);
}

TEST(Cli, BadInputsExitNonZero)
{
    test::TempDir dir;
    auto junk = dir / "junk.hsc";
    test::write_file(junk, "not a container at all, just some bytes padding it out");
    auto r = cli("inspect " + quote(junk));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("BadMagic"), std::string::npos) << r.output;

    auto usage = cli("compress");
    EXPECT_EQ(usage.exit_code, 1);
    EXPECT_EQ(usage.output.rfind("error:", 0), 0u) << usage.output;

    EXPECT_EQ(cli("--help").exit_code, 0);
}

TEST(Cli, InspectJsonMatchesIndex)
{
    test::TempDir dir;
    auto input = dir / "reads.fasta";
    auto packed = dir / "reads.hsc";
    ASSERT_EQ(cli("gen --format fasta --reads 500 --length 100 --seed 7 -o " + quote(input)).exit_code, 0);
    ASSERT_EQ(cli("compress --codec rle1 --block-size 4096 " + quote(input) + " " + quote(packed)).exit_code, 0);

    auto r = cli("inspect --json " + quote(packed));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto j = nlohmann::json::parse(r.output);
    auto info = read_index(packed);
    EXPECT_EQ(j["codec"], "rle1");
    EXPECT_EQ(j["block_count"].get<std::uint64_t>(), info.index.block_count());
    EXPECT_EQ(j["compressed_sizes"].get<std::vector<std::uint64_t>>(), info.index.compressed_sizes);
    EXPECT_EQ(j["uncompressed_sizes"].get<std::vector<std::uint64_t>>(), info.index.uncompressed_sizes);
    EXPECT_EQ(j["target_block_size"].get<std::uint64_t>(), 4096u);
    EXPECT_TRUE(j["flags"]["fasta"].get<bool>());
    EXPECT_EQ(j["blocks"].back()["offset"].get<std::uint64_t>(), info.refs.back().offset);
}

TEST(Cli, PlanSplitCounts)
{
    test::TempDir dir;
    auto input = dir / "reads.fastq";
    auto packed = dir / "reads.hsc";
    ASSERT_EQ(cli("gen --format fastq --reads 1000 --length 151 --seed 1 -o " + quote(input)).exit_code, 0);
    ASSERT_EQ(cli("compress --codec store --block-size 16384 " + quote(input) + " " + quote(packed)).exit_code, 0);
    auto info = read_index(packed);

    auto per_block = cli("plan --strategy per-block --hdfs-block-size 65536 --json " + quote(packed));
    ASSERT_EQ(per_block.exit_code, 0) << per_block.output;
    auto pj = nlohmann::json::parse(per_block.output);
    EXPECT_EQ(pj["splits"].size(), info.index.block_count());

    auto enhanced = cli("plan --strategy enhanced --hdfs-block-size 65536 --json " + quote(packed));
    ASSERT_EQ(enhanced.exit_code, 0) << enhanced.output;
    auto ej = nlohmann::json::parse(enhanced.output);
    EXPECT_LT(ej["splits"].size(), pj["splits"].size());
    std::size_t members = 0;
    for (const auto& split : ej["splits"]) members += split["blocks"].size();
    EXPECT_EQ(members, info.index.block_count());
}

TEST(Cli, BenchCountMapJson)
{
    test::TempDir dir;
    auto input = dir / "reads.fastq";
    auto packed = dir / "reads.hsc";
    ASSERT_EQ(cli("gen --format fastq --reads 300 --length 151 --seed 9 -o " + quote(input)).exit_code, 0);
    ASSERT_EQ(cli("compress --codec rle1 --block-size 8192 " + quote(input) + " " + quote(packed)).exit_code, 0);
    auto r = cli("bench count-map --workers 2 --hdfs-block-size 32768 --json " + quote(packed));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto j = nlohmann::json::parse(r.output);
    auto truth = make_synthetic_dataset(RecordFormat::fastq, 300, 151, 9).counts;
    EXPECT_EQ(j["letter_counts"]["A"].get<std::uint64_t>(), truth.values[0]);
    EXPECT_EQ(j["letter_counts"]["N"].get<std::uint64_t>(), truth.values[4]);
    EXPECT_EQ(j["records_processed"].get<std::uint64_t>(), 300u);
    EXPECT_EQ(j["bytes_read_remote"], j["predicted_remote_bytes"]);
}
