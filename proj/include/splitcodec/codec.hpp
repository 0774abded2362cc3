#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace splitcodec {

/// Identifies a codec inside a container header. 0 and 1 are the built-ins,
/// 2..999 are reserved, 1000 and above belong to externally configured codecs.
enum class CodecId : std::uint32_t {
    store = 0,
    rle1 = 1,
};

inline constexpr std::uint32_t kFirstExternalCodecId = 1000;
inline constexpr std::size_t kDefaultMaxBlockSize = std::size_t{256} << 20;

[[nodiscard]] constexpr std::uint32_t to_underlying(CodecId id) noexcept
{
    return static_cast<std::uint32_t>(id);
}

[[nodiscard]] constexpr bool is_reserved(CodecId id) noexcept
{
    auto v = to_underlying(id);
    return v >= 2 && v < kFirstExternalCodecId;
}

/**
 * Contract shared by every block compressor.
 *
 * A block is compressed and decompressed in isolation: implementations keep no
 * state between calls, which is what lets any subset of a container's blocks be
 * decoded in any order. Instances are immutable after construction and may be
 * used from any number of threads at once.
 *
 * compress() enforces the block size cap and turns non-library exceptions into
 * CodecFailure. decompress() guarantees the result is exactly expected_size
 * bytes long or throws.
 */
class BlockCodec {
public:
    explicit BlockCodec(std::size_t max_block_size = kDefaultMaxBlockSize) : max_block_size_(max_block_size) {}
    virtual ~BlockCodec() = default;

    BlockCodec(const BlockCodec&) = delete;
    BlockCodec& operator=(const BlockCodec&) = delete;

    [[nodiscard]] virtual CodecId id() const noexcept = 0;
    [[nodiscard]] virtual std::string_view name() const noexcept = 0;

    [[nodiscard]] std::size_t max_block_size() const noexcept { return max_block_size_; }

    [[nodiscard]] std::string compress(std::string_view data) const;
    [[nodiscard]] std::string decompress(std::string_view data, std::size_t expected_size) const;

protected:
    [[nodiscard]] virtual std::string do_compress(std::string_view data) const = 0;
    [[nodiscard]] virtual std::string do_decompress(std::string_view data, std::size_t expected_size) const = 0;

private:
    std::size_t max_block_size_;
};

/// Identity codec.
class StoreCodec final : public BlockCodec {
public:
    using BlockCodec::BlockCodec;
    [[nodiscard]] CodecId id() const noexcept override { return CodecId::store; }
    [[nodiscard]] std::string_view name() const noexcept override { return "store"; }

protected:
    [[nodiscard]] std::string do_compress(std::string_view data) const override;
    [[nodiscard]] std::string do_decompress(std::string_view data, std::size_t expected_size) const override;
};

/**
 * Byte-oriented run-length codec.
 *
 * Stream of groups, each led by a control byte c:
 *   c in 0x00..0x7F  ->  c + 1 literal bytes follow
 *   c in 0x80..0xFF  ->  one byte follows, repeated (c - 0x80) + 2 times
 *
 * Encoding is canonical: every run of two or more equal bytes becomes repeat
 * groups of at most 130, and the remaining bytes are packed into literal groups
 * of at most 128, greedily.
 */
class Rle1Codec final : public BlockCodec {
public:
    using BlockCodec::BlockCodec;
    [[nodiscard]] CodecId id() const noexcept override { return CodecId::rle1; }
    [[nodiscard]] std::string_view name() const noexcept override { return "rle1"; }

protected:
    [[nodiscard]] std::string do_compress(std::string_view data) const override;
    [[nodiscard]] std::string do_decompress(std::string_view data, std::size_t expected_size) const override;
};

/// Maps codec ids and names to codec instances. Starts out holding the two built-ins.
class CodecRegistry {
public:
    CodecRegistry();

    /// Throws ReservedId for ids 2..999 and DuplicateCodec if the id or name is already bound.
    void add(std::shared_ptr<const BlockCodec> codec);

    /// Throws ReservedId or UnknownCodec.
    [[nodiscard]] std::shared_ptr<const BlockCodec> resolve(CodecId id) const;
    [[nodiscard]] std::shared_ptr<const BlockCodec> resolve(std::string_view name) const;

    /// Accepts either a registered name or a decimal id.
    [[nodiscard]] std::shared_ptr<const BlockCodec> resolve_spec(std::string_view name_or_id) const;

    [[nodiscard]] const std::map<std::uint32_t, std::shared_ptr<const BlockCodec>>& codecs() const noexcept
    {
        return by_id_;
    }

private:
    std::map<std::uint32_t, std::shared_ptr<const BlockCodec>> by_id_;
    std::map<std::string, std::shared_ptr<const BlockCodec>, std::less<>> by_name_;
};

} // namespace splitcodec
