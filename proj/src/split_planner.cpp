#include "splitcodec/split_planner.hpp"

#include <algorithm>

#include "splitcodec/error.hpp"

namespace splitcodec {

bool PhysicalBlock::held_by(std::uint32_t node) const noexcept
{
    return std::find(replicas.begin(), replicas.end(), node) != replicas.end();
}

const PhysicalBlock& HdfsLayout::block_at(std::uint64_t offset) const
{
    if (offset >= file_length) {
        raise(ErrorKind::OutOfRange, "offset " + std::to_string(offset) + " is past the file end " +
                                         std::to_string(file_length));
    }
    return blocks[offset / hdfs_block_size];
}

std::uint64_t hdfs_block_count(std::uint64_t file_length, std::uint64_t hdfs_block_size)
{
    if (hdfs_block_size == 0) {
        raise(ErrorKind::BadParams, "hdfs block size must be at least 1");
    }
    return file_length / hdfs_block_size + (file_length % hdfs_block_size != 0 ? 1 : 0);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void check_same_file(const ContainerIndex& index, const HdfsLayout& layout)
{
    auto length = container_length(index);
    if (length != layout.file_length) {
        raise(ErrorKind::LengthMismatch, "index describes a " + std::to_string(length) + "-byte file, layout a " +
                                             std::to_string(layout.file_length) + "-byte one");
    }
}

} // namespace

HdfsLayout layout_file(std::uint64_t file_length, std::uint64_t hdfs_block_size, std::uint32_t node_count,
                       std::uint32_t replication, std::uint64_t seed)
{
    if (hdfs_block_size == 0) {
        raise(ErrorKind::BadParams, "hdfs block size must be at least 1");
    }
    if (replication == 0 || node_count < replication) {
        raise(ErrorKind::BadParams, "need node_count >= replication >= 1, got " + std::to_string(node_count) +
                                        " nodes and replication " + std::to_string(replication));
    }
    HdfsLayout layout{hdfs_block_size, file_length, node_count, replication, {}};
    auto count = hdfs_block_count(file_length, hdfs_block_size);
    layout.blocks.reserve(count);
    auto first_home = splitmix64(seed) % node_count;
    for (std::uint64_t i = 0; i < count; ++i) {
        PhysicalBlock block;
        block.ordinal = i;
        block.start = i * hdfs_block_size;
        block.length = std::min(hdfs_block_size, file_length - block.start);
        auto home = (first_home + i) % node_count;
        for (std::uint32_t r = 0; r < replication; ++r) {
            block.replicas.push_back(static_cast<std::uint32_t>((home + r) % node_count));
        }
        layout.blocks.push_back(std::move(block));
    }
    return layout;
}

HdfsLayout layout_file(std::uint64_t file_length, const LayoutParams& params)
{
    return layout_file(file_length, params.hdfs_block_size, params.node_count, params.replication, params.seed);
}

std::string_view to_string(SplitStrategy strategy) noexcept
{
    return strategy == SplitStrategy::per_block ? "per-block" : "enhanced";
}

SplitStrategy parse_split_strategy(std::string_view text)
{
    if (text == "per-block") return SplitStrategy::per_block;
    if (text == "enhanced") return SplitStrategy::enhanced;
    raise(ErrorKind::BadValue, "unknown split strategy '" + std::string(text) + "'");
}

std::vector<InputSplit> plan_splits_per_block(const ContainerIndex& index)
{
    std::vector<InputSplit> splits;
    for (const auto& ref : block_refs(index)) {
        splits.push_back({ref.ordinal, {ref}, std::nullopt});
    }
    return splits;
}

std::vector<InputSplit> plan_splits_per_block(const ContainerIndex& index, const HdfsLayout& layout)
{
    check_same_file(index, layout);
    auto splits = plan_splits_per_block(index);
    for (auto& split : splits) {
        split.anchor_hdfs_block = layout.block_at(split.member_blocks.front().offset).ordinal;
    }
    return splits;
}

std::vector<InputSplit> plan_splits_enhanced(const ContainerIndex& index, const HdfsLayout& layout)
{
    check_same_file(index, layout);
    std::vector<InputSplit> splits;
    for (const auto& ref : block_refs(index)) {
        auto anchor = layout.block_at(ref.offset).ordinal;
        if (splits.empty() || splits.back().anchor_hdfs_block != anchor) {
            splits.push_back({splits.size(), {}, anchor});
        }
        splits.back().member_blocks.push_back(ref);
    }
    return splits;
}

std::vector<InputSplit> plan_splits(const ContainerIndex& index, const HdfsLayout& layout, SplitStrategy strategy)
{
    return strategy == SplitStrategy::per_block ? plan_splits_per_block(index, layout)
                                                : plan_splits_enhanced(index, layout);
}

SplitResolution resolve_block(const BlockRef& block, const HdfsLayout& layout)
{
    if (block.offset >= layout.file_length || block.compressed_len > layout.file_length - block.offset) {
        raise(ErrorKind::OutOfRange, "block " + std::to_string(block.ordinal) + " [" + std::to_string(block.offset) +
                                         ", " + std::to_string(block.end()) + ") is not inside the " +
                                         std::to_string(layout.file_length) + "-byte file");
    }
    SplitResolution resolution;
    resolution.block = block;
    const auto& anchor = layout.block_at(block.offset);
    auto task_node = anchor.home();

    auto offset = block.offset;
    do {
        const auto& physical = layout.block_at(offset);
        auto length = std::min(block.end(), physical.end()) - offset;
        bool remote = !physical.held_by(task_node);
        resolution.parts.push_back({offset, length, physical.ordinal, physical.home(), remote});
        if (remote) {
            resolution.remote_bytes += length;
        }
        offset += length;
    } while (offset < block.end());

    resolution.kind = resolution.parts.size() > 1 ? ResolutionKind::exceptional : ResolutionKind::standard;
    return resolution;
}

} // namespace splitcodec
