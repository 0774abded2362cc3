#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "splitcodec/container.hpp"

namespace splitcodec {

inline constexpr std::uint64_t kDefaultHdfsBlockSize = std::uint64_t{128} << 20;

/// One fixed-size physical partition of a file and the nodes holding its replicas.
/// replicas.front() is the home node.
struct PhysicalBlock {
    std::uint64_t ordinal = 0;
    std::uint64_t start = 0;
    std::uint64_t length = 0;
    std::vector<std::uint32_t> replicas;

    [[nodiscard]] std::uint64_t end() const noexcept { return start + length; }
    [[nodiscard]] std::uint32_t home() const noexcept { return replicas.front(); }
    [[nodiscard]] bool held_by(std::uint32_t node) const noexcept;
};

struct LayoutParams {
    std::uint64_t hdfs_block_size = kDefaultHdfsBlockSize;
    std::uint32_t node_count = 8;
    std::uint32_t replication = 1;
    std::uint64_t seed = 0;
};

/// Simulated distributed-file-system placement of one file.
struct HdfsLayout {
    std::uint64_t hdfs_block_size = kDefaultHdfsBlockSize;
    std::uint64_t file_length = 0;
    std::uint32_t node_count = 1;
    std::uint32_t replication = 1;
    std::vector<PhysicalBlock> blocks;

    /// Physical block containing byte `offset`. OutOfRange past the file end.
    [[nodiscard]] const PhysicalBlock& block_at(std::uint64_t offset) const;
};

/// ceil(file_length / hdfs_block_size), without materializing anything.
[[nodiscard]] std::uint64_t hdfs_block_count(std::uint64_t file_length, std::uint64_t hdfs_block_size);

/**
 * Tiles [0, file_length) into hdfs_block_size pieces (the last may be short).
 * Block i's home is (start + i) mod node_count with `start` derived from the
 * seed; its remaining replicas are the next replication - 1 nodes round-robin.
 */
[[nodiscard]] HdfsLayout layout_file(std::uint64_t file_length, std::uint64_t hdfs_block_size,
                                     std::uint32_t node_count, std::uint32_t replication, std::uint64_t seed);
[[nodiscard]] HdfsLayout layout_file(std::uint64_t file_length, const LayoutParams& params);

enum class SplitStrategy { per_block, enhanced };

[[nodiscard]] std::string_view to_string(SplitStrategy strategy) noexcept;
/// "per-block" or "enhanced"; BadValue otherwise.
[[nodiscard]] SplitStrategy parse_split_strategy(std::string_view text);

struct InputSplit {
    std::uint64_t ordinal = 0;
    std::vector<BlockRef> member_blocks;
    /// Physical block holding the first member's first byte; unset when planned without a layout.
    std::optional<std::uint64_t> anchor_hdfs_block;
};

struct FetchPart {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    std::uint64_t hdfs_block = 0;
    std::uint32_t home_node = 0;
    bool remote = false;

    bool operator==(const FetchPart&) const = default;
};

enum class ResolutionKind { standard, exceptional };

/// How one compressed block is fetched: one part if it sits inside a physical
/// block, otherwise one part per physical block it touches.
struct SplitResolution {
    BlockRef block;
    ResolutionKind kind = ResolutionKind::standard;
    std::vector<FetchPart> parts;
    std::uint64_t remote_bytes = 0;
};

/// One split per compressed block, in order.
[[nodiscard]] std::vector<InputSplit> plan_splits_per_block(const ContainerIndex& index);
/// Same, with each split anchored in `layout`. LengthMismatch if the layout is for another file.
[[nodiscard]] std::vector<InputSplit> plan_splits_per_block(const ContainerIndex& index, const HdfsLayout& layout);

/// Groups compressed blocks by the physical block holding their first byte.
/// Physical blocks with no block start produce no split.
[[nodiscard]] std::vector<InputSplit> plan_splits_enhanced(const ContainerIndex& index, const HdfsLayout& layout);

[[nodiscard]] std::vector<InputSplit> plan_splits(const ContainerIndex& index, const HdfsLayout& layout,
                                                  SplitStrategy strategy);

/**
 * Fetch plan for one compressed block, as read by a task running on the home
 * node of the physical block holding the block's first byte. A part is remote
 * when no replica of its physical block lives on that node.
 */
[[nodiscard]] SplitResolution resolve_block(const BlockRef& block, const HdfsLayout& layout);

} // namespace splitcodec
