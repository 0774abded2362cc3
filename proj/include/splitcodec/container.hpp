#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitcodec/codec.hpp"

namespace splitcodec {

/**
 * Container file layout (all integers little-endian):
 *
 * @verbatim
 * 00  "HSUCFMT1"          # header magic
 * 08  <2B>                # version (1)
 * 10  <4B>                # codec id
 * 14  <2B>                # flags: bit0 record-aligned, bit1 FASTQ, bit2 FASTA
 * 16  <compressed blocks, back to back>
 *     <8B>                # block count n
 *     <8B> x n            # compressed sizes
 *     <8B> x n            # uncompressed sizes
 *     <8B>                # target block size
 *     <4B>                # CRC32 of the index bytes above
 *     <8B>                # index length (16 + 16 n)
 *     "HSUCIDX1"          # trailer magic
 * @endverbatim
 *
 * The index sits at the end so the writer can stream blocks in one pass;
 * readers find it by seeking to the fixed-size trailer.
 */
inline constexpr std::string_view kHeaderMagic = "HSUCFMT1";
inline constexpr std::string_view kTrailerMagic = "HSUCIDX1";
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint64_t kHeaderSize = 16;
inline constexpr std::uint64_t kTrailerSize = 20;
inline constexpr std::uint64_t kDefaultTargetBlockSize = std::uint64_t{10} << 20;

namespace flags {
inline constexpr std::uint16_t record_aligned = 1u << 0;
inline constexpr std::uint16_t fastq = 1u << 1;
inline constexpr std::uint16_t fasta = 1u << 2;
} // namespace flags

struct ContainerHeader {
    std::uint16_t version = kFormatVersion;
    CodecId codec_id = CodecId::store;
    std::uint16_t flags = 0;

    [[nodiscard]] bool record_aligned() const noexcept { return (flags & flags::record_aligned) != 0; }
    [[nodiscard]] bool fastq() const noexcept { return (flags & flags::fastq) != 0; }
    [[nodiscard]] bool fasta() const noexcept { return (flags & flags::fasta) != 0; }

    bool operator==(const ContainerHeader&) const = default;
};

struct ContainerIndex {
    std::vector<std::uint64_t> compressed_sizes;
    std::vector<std::uint64_t> uncompressed_sizes;
    std::uint64_t target_block_size = kDefaultTargetBlockSize;

    [[nodiscard]] std::uint64_t block_count() const noexcept { return compressed_sizes.size(); }

    bool operator==(const ContainerIndex&) const = default;
};

/// Location of one compressed block inside a container file.
struct BlockRef {
    std::uint64_t ordinal = 0;
    std::uint64_t offset = 0;
    std::uint64_t compressed_len = 0;
    std::uint64_t uncompressed_len = 0;

    [[nodiscard]] std::uint64_t end() const noexcept { return offset + compressed_len; }

    bool operator==(const BlockRef&) const = default;
};

/// Everything read_index learns about a container.
struct ContainerInfo {
    ContainerHeader header;
    ContainerIndex index;
    std::vector<BlockRef> refs;
    std::uint64_t file_length = 0;
};

struct ContainerOptions {
    std::uint16_t flags = 0;
    std::uint64_t target_block_size = kDefaultTargetBlockSize;
};

[[nodiscard]] std::string serialize_header(const ContainerHeader& header);
[[nodiscard]] std::string serialize_index(const ContainerIndex& index);
[[nodiscard]] std::string serialize_trailer(std::string_view serialized_index);

[[nodiscard]] std::uint64_t index_length(std::uint64_t block_count) noexcept;

/// Offsets by prefix sum over the compressed sizes, starting right after the header.
[[nodiscard]] std::vector<BlockRef> block_refs(const ContainerIndex& index);

/// Total file length implied by an index.
[[nodiscard]] std::uint64_t container_length(const ContainerIndex& index) noexcept;

/// Largest uncompressed block the index may declare under the given flags.
[[nodiscard]] std::uint64_t max_uncompressed_block(std::uint64_t target_block_size, std::uint16_t flags) noexcept;

/// Streams a container: header at construction, one compressed block per
/// append(), index and trailer at finish(). Single writer.
class ContainerWriter {
public:
    ContainerWriter(std::ostream& out, const BlockCodec& codec, ContainerOptions options = {});

    void append(std::string_view block);
    ContainerIndex finish();

private:
    std::ostream& out_;
    const BlockCodec& codec_;
    ContainerOptions options_;
    ContainerIndex index_;
    bool finished_ = false;
};

/**
 * Compresses `input` cut at `boundaries` (0 = b0 < b1 < ... < bn = size).
 * An empty input accepts an empty plan (or just {0}) and yields a zero-block container.
 */
ContainerIndex write_container(std::string_view input, const BlockCodec& codec,
                               std::span<const std::uint64_t> boundaries, std::ostream& out,
                               ContainerOptions options = {});

/// Validates both magics, the version, the index CRC and the size-sum invariant.
[[nodiscard]] ContainerInfo read_index(std::istream& in);
[[nodiscard]] ContainerInfo read_index(const std::filesystem::path& path);

/// Raw compressed bytes of one block. IoFailure if the range runs past the file.
[[nodiscard]] std::string read_compressed(std::istream& in, const BlockRef& ref);

/// Plaintext of one block. Errors carry the block ordinal.
[[nodiscard]] std::string read_block(std::istream& in, const BlockRef& ref, const BlockCodec& codec);

/// Immutable index loaded once and handed to every worker by pointer.
class SharedIndex {
public:
    explicit SharedIndex(ContainerIndex index);

    [[nodiscard]] const ContainerIndex& index() const noexcept { return index_; }
    [[nodiscard]] std::span<const BlockRef> refs() const noexcept { return refs_; }
    [[nodiscard]] std::uint64_t block_count() const noexcept { return refs_.size(); }
    [[nodiscard]] std::uint64_t file_length() const noexcept { return file_length_; }

    /// Throws OutOfRange past block_count.
    [[nodiscard]] const BlockRef& block(std::uint64_t ordinal) const;

private:
    ContainerIndex index_;
    std::vector<BlockRef> refs_;
    std::uint64_t file_length_;
};

[[nodiscard]] std::shared_ptr<const SharedIndex> share_index(ContainerIndex index);

} // namespace splitcodec
