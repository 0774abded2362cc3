#include "splitcodec/container.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <zlib.h>

#include "little_endian.hpp"
#include "splitcodec/error.hpp"
#include "splitcodec/record_io.hpp"

namespace splitcodec {

using detail::get_le;
using detail::put_le;

namespace {

constexpr std::uint16_t kKnownFlags = flags::record_aligned | flags::fastq | flags::fasta;

std::uint32_t crc32_of(std::string_view bytes)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in slices to stay within range.
    constexpr std::size_t kSlice = std::size_t{1} << 30;
    for (std::size_t pos = 0; pos < bytes.size(); pos += kSlice) {
        auto piece = bytes.substr(pos, kSlice);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(piece.data()), static_cast<uInt>(piece.size()));
    }
    return static_cast<std::uint32_t>(crc);
}

std::uint64_t stream_length(std::istream& in)
{
    in.clear();
    in.seekg(0, std::ios::end);
    auto end = in.tellg();
    if (!in || end < 0) {
        raise(ErrorKind::IoFailure, "cannot determine container length");
    }
    return static_cast<std::uint64_t>(end);
}

std::string read_at(std::istream& in, std::uint64_t offset, std::uint64_t length)
{
    in.clear();
    in.seekg(static_cast<std::streamoff>(offset));
    std::string buffer(length, '\0');
    in.read(buffer.data(), static_cast<std::streamsize>(length));
    if (static_cast<std::uint64_t>(in.gcount()) != length) {
        raise(ErrorKind::IoFailure, "short read of " + std::to_string(length) + " bytes at offset " +
                                        std::to_string(offset));
    }
    return buffer;
}

void validate_header_flags(std::uint16_t value)
{
    if ((value & ~kKnownFlags) != 0) {
        raise(ErrorKind::BadHeader, "unknown header flag bits 0x" + std::to_string(value & ~kKnownFlags));
    }
    if ((value & flags::fastq) && (value & flags::fasta)) {
        raise(ErrorKind::BadHeader, "FASTQ and FASTA payload flags are mutually exclusive");
    }
}

} // namespace

std::string serialize_header(const ContainerHeader& header)
{
    std::string out(kHeaderMagic);
    put_le<std::uint16_t>(out, header.version);
    put_le<std::uint32_t>(out, to_underlying(header.codec_id));
    put_le<std::uint16_t>(out, header.flags);
    return out;
}

std::string serialize_index(const ContainerIndex& index)
{
    std::string out;
    out.reserve(index_length(index.block_count()));
    put_le<std::uint64_t>(out, index.block_count());
    for (auto size : index.compressed_sizes) {
        put_le<std::uint64_t>(out, size);
    }
    for (auto size : index.uncompressed_sizes) {
        put_le<std::uint64_t>(out, size);
    }
    put_le<std::uint64_t>(out, index.target_block_size);
    return out;
}

std::string serialize_trailer(std::string_view serialized_index)
{
    std::string out;
    put_le<std::uint32_t>(out, crc32_of(serialized_index));
    put_le<std::uint64_t>(out, serialized_index.size());
    out.append(kTrailerMagic);
    return out;
}

std::uint64_t index_length(std::uint64_t block_count) noexcept
{
    return 8 + 16 * block_count + 8;
}

std::vector<BlockRef> block_refs(const ContainerIndex& index)
{
    std::vector<BlockRef> refs;
    refs.reserve(index.block_count());
    std::uint64_t offset = kHeaderSize;
    for (std::uint64_t i = 0; i < index.block_count(); ++i) {
        refs.push_back({i, offset, index.compressed_sizes[i], index.uncompressed_sizes[i]});
        offset += index.compressed_sizes[i];
    }
    return refs;
}

std::uint64_t container_length(const ContainerIndex& index) noexcept
{
    std::uint64_t payload = 0;
    for (auto size : index.compressed_sizes) {
        payload += size;
    }
    return kHeaderSize + payload + index_length(index.block_count()) + kTrailerSize;
}

std::uint64_t max_uncompressed_block(std::uint64_t target_block_size, std::uint16_t value) noexcept
{
    if ((value & flags::record_aligned) != 0) {
        return target_block_size + kMaxRecordLength;
    }
    return target_block_size;
}

ContainerWriter::ContainerWriter(std::ostream& out, const BlockCodec& codec, ContainerOptions options)
    : out_(out), codec_(codec), options_(options)
{
    validate_header_flags(options_.flags);
    if (options_.target_block_size == 0) {
        raise(ErrorKind::BadPlan, "target block size must be at least 1");
    }
    index_.target_block_size = options_.target_block_size;
    auto header = serialize_header({kFormatVersion, codec_.id(), options_.flags});
    out_.write(header.data(), static_cast<std::streamsize>(header.size()));
    if (!out_) {
        raise(ErrorKind::IoFailure, "failed to write container header");
    }
}

void ContainerWriter::append(std::string_view block)
{
    if (finished_) {
        raise(ErrorKind::BadPlan, "append after finish");
    }
    if (block.empty()) {
        raise(ErrorKind::BadPlan, "chunk plans may not contain empty blocks");
    }
    if (block.size() > max_uncompressed_block(options_.target_block_size, options_.flags)) {
        raise(ErrorKind::BadPlan, "block of " + std::to_string(block.size()) + " bytes exceeds the target of " +
                                      std::to_string(options_.target_block_size));
    }
    auto compressed = codec_.compress(block);
    out_.write(compressed.data(), static_cast<std::streamsize>(compressed.size()));
    if (!out_) {
        raise(ErrorKind::IoFailure, "failed to write block " + std::to_string(index_.block_count()));
    }
    index_.compressed_sizes.push_back(compressed.size());
    index_.uncompressed_sizes.push_back(block.size());
}

ContainerIndex ContainerWriter::finish()
{
    if (finished_) {
        raise(ErrorKind::BadPlan, "finish called twice");
    }
    finished_ = true;
    auto index_bytes = serialize_index(index_);
    auto trailer = serialize_trailer(index_bytes);
    out_.write(index_bytes.data(), static_cast<std::streamsize>(index_bytes.size()));
    out_.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
    out_.flush();
    if (!out_) {
        raise(ErrorKind::IoFailure, "failed to write container index");
    }
    return index_;
}

ContainerIndex write_container(std::string_view input, const BlockCodec& codec,
                               std::span<const std::uint64_t> boundaries, std::ostream& out,
                               ContainerOptions options)
{
    if (!input.empty() && boundaries.empty()) {
        raise(ErrorKind::EmptyPlan, "non-empty input with an empty chunk plan");
    }
    if (!boundaries.empty()) {
        if (boundaries.front() != 0 || boundaries.back() != input.size()) {
            raise(ErrorKind::BadPlan, "chunk plan must start at 0 and end at the input length");
        }
        for (std::size_t i = 1; i < boundaries.size(); ++i) {
            if (boundaries[i] <= boundaries[i - 1]) {
                raise(ErrorKind::BadPlan, "chunk boundaries must be strictly increasing");
            }
        }
    }
    ContainerWriter writer(out, codec, options);
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        writer.append(input.substr(boundaries[i - 1], boundaries[i] - boundaries[i - 1]));
    }
    return writer.finish();
}

ContainerInfo read_index(std::istream& in)
{
    ContainerInfo info;
    info.file_length = stream_length(in);
    if (info.file_length < kHeaderSize) {
        raise(ErrorKind::TruncatedFile, "file is shorter than the container header");
    }
    auto header = read_at(in, 0, kHeaderSize);
    if (std::string_view(header).substr(0, kHeaderMagic.size()) != kHeaderMagic) {
        raise(ErrorKind::BadMagic, "header magic is not " + std::string(kHeaderMagic));
    }
    info.header.version = get_le<std::uint16_t>(header, 8);
    if (info.header.version != kFormatVersion) {
        raise(ErrorKind::BadVersion, "unsupported container version " + std::to_string(info.header.version));
    }
    info.header.codec_id = CodecId{get_le<std::uint32_t>(header, 10)};
    info.header.flags = get_le<std::uint16_t>(header, 14);
    validate_header_flags(info.header.flags);

    if (info.file_length < kHeaderSize + index_length(0) + kTrailerSize) {
        raise(ErrorKind::TruncatedFile, "file is too short to hold an index and trailer");
    }
    auto trailer = read_at(in, info.file_length - kTrailerSize, kTrailerSize);
    if (std::string_view(trailer).substr(12) != kTrailerMagic) {
        raise(ErrorKind::TruncatedFile, "trailer magic not found at end of file");
    }
    auto stored_crc = get_le<std::uint32_t>(trailer, 0);
    auto stored_index_length = get_le<std::uint64_t>(trailer, 4);
    if (stored_index_length > info.file_length - kHeaderSize - kTrailerSize) {
        raise(ErrorKind::TruncatedFile, "index length " + std::to_string(stored_index_length) +
                                            " does not fit in the file");
    }
    if (stored_index_length < index_length(0) || (stored_index_length - index_length(0)) % 16 != 0) {
        raise(ErrorKind::IndexInconsistent, "malformed index length " + std::to_string(stored_index_length));
    }

    auto index_offset = info.file_length - kTrailerSize - stored_index_length;
    auto index_bytes = read_at(in, index_offset, stored_index_length);
    if (crc32_of(index_bytes) != stored_crc) {
        raise(ErrorKind::CrcMismatch, "index CRC32 does not match the trailer");
    }

    auto count = get_le<std::uint64_t>(index_bytes, 0);
    if (index_length(count) != stored_index_length) {
        raise(ErrorKind::IndexInconsistent, "block count " + std::to_string(count) + " disagrees with index length");
    }
    info.index.compressed_sizes.reserve(count);
    info.index.uncompressed_sizes.reserve(count);
    std::uint64_t payload = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        auto size = get_le<std::uint64_t>(index_bytes, 8 + 8 * i);
        if (size > std::numeric_limits<std::uint64_t>::max() - payload) {
            raise(ErrorKind::IndexInconsistent, "compressed sizes overflow");
        }
        payload += size;
        info.index.compressed_sizes.push_back(size);
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        info.index.uncompressed_sizes.push_back(get_le<std::uint64_t>(index_bytes, 8 + 8 * (count + i)));
    }
    info.index.target_block_size = get_le<std::uint64_t>(index_bytes, 8 + 16 * count);

    if (payload != index_offset - kHeaderSize) {
        raise(ErrorKind::IndexInconsistent, "compressed sizes sum to " + std::to_string(payload) + " but the body is " +
                                                std::to_string(index_offset - kHeaderSize) + " bytes");
    }
    auto cap = max_uncompressed_block(info.index.target_block_size, info.header.flags);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (info.index.uncompressed_sizes[i] > cap) {
            raise(ErrorKind::IndexInconsistent, "block " + std::to_string(i) + " declares " +
                                                    std::to_string(info.index.uncompressed_sizes[i]) +
                                                    " uncompressed bytes, above the cap of " + std::to_string(cap));
        }
    }
    info.refs = block_refs(info.index);
    return info;
}

ContainerInfo read_index(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    return read_index(in);
}

std::string read_compressed(std::istream& in, const BlockRef& ref)
{
    auto length = stream_length(in);
    if (ref.offset > length || ref.compressed_len > length - ref.offset) {
        raise(ErrorKind::IoFailure, "block " + std::to_string(ref.ordinal) + " range [" + std::to_string(ref.offset) +
                                        ", " + std::to_string(ref.end()) + ") runs past the end of the file");
    }
    return read_at(in, ref.offset, ref.compressed_len);
}

std::string read_block(std::istream& in, const BlockRef& ref, const BlockCodec& codec)
{
    try {
        auto compressed = read_compressed(in, ref);
        return codec.decompress(compressed, ref.uncompressed_len);
    } catch (const Error& e) {
        if (e.detail().starts_with("block ")) {
            throw;
        }
        throw Error(e.kind(), "block " + std::to_string(ref.ordinal) + ": " + e.detail());
    }
}

SharedIndex::SharedIndex(ContainerIndex index)
    : index_(std::move(index)), refs_(block_refs(index_)), file_length_(container_length(index_))
{
}

const BlockRef& SharedIndex::block(std::uint64_t ordinal) const
{
    if (ordinal >= refs_.size()) {
        raise(ErrorKind::OutOfRange, "block ordinal " + std::to_string(ordinal) + " is past the " +
                                         std::to_string(refs_.size()) + " blocks of the index");
    }
    return refs_[ordinal];
}

std::shared_ptr<const SharedIndex> share_index(ContainerIndex index)
{
    return std::make_shared<const SharedIndex>(std::move(index));
}

} // namespace splitcodec
