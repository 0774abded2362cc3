#include "splitcodec/codec.hpp"

#include <algorithm>
#include <charconv>
#include <exception>

#include "splitcodec/error.hpp"

namespace splitcodec {

std::string BlockCodec::compress(std::string_view data) const
{
    if (data.size() > max_block_size_) {
        raise(ErrorKind::OversizeBlock, "block of " + std::to_string(data.size()) + " bytes exceeds the " +
                                            std::to_string(max_block_size_) + "-byte cap of codec " +
                                            std::string(name()));
    }
    try {
        return do_compress(data);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        raise(ErrorKind::CodecFailure, std::string(name()) + ": " + e.what());
    }
}

std::string BlockCodec::decompress(std::string_view data, std::size_t expected_size) const
{
    if (expected_size > max_block_size_) {
        raise(ErrorKind::OversizeBlock, "declared block size " + std::to_string(expected_size) + " exceeds the cap");
    }
    std::string out;
    try {
        out = do_decompress(data, expected_size);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        raise(ErrorKind::CodecFailure, std::string(name()) + ": " + e.what());
    }
    if (out.size() != expected_size) {
        raise(ErrorKind::CorruptBlock, std::string(name()) + " produced " + std::to_string(out.size()) +
                                           " bytes, expected " + std::to_string(expected_size));
    }
    return out;
}

std::string StoreCodec::do_compress(std::string_view data) const
{
    return std::string(data);
}

std::string StoreCodec::do_decompress(std::string_view data, std::size_t expected_size) const
{
    if (data.size() != expected_size) {
        raise(ErrorKind::CorruptBlock, "stored block is " + std::to_string(data.size()) + " bytes, expected " +
                                           std::to_string(expected_size));
    }
    return std::string(data);
}

namespace {

constexpr std::size_t kMaxLiteral = 128;
constexpr std::size_t kMinRun = 2;
constexpr std::size_t kMaxRun = 129;

} // namespace

std::string Rle1Codec::do_compress(std::string_view data) const
{
    std::string out;
    out.reserve(data.size() + data.size() / kMaxLiteral + 1);

    std::size_t literal_start = 0;
    std::size_t literal_len = 0;
    auto flush_literals = [&] {
        while (literal_len > 0) {
            auto take = std::min(literal_len, kMaxLiteral);
            out.push_back(static_cast<char>(take - 1));
            out.append(data.substr(literal_start, take));
            literal_start += take;
            literal_len -= take;
        }
    };

    std::size_t i = 0;
    while (i < data.size()) {
        std::size_t run = 1;
        while (i + run < data.size() && data[i + run] == data[i]) {
            ++run;
        }
        if (run < kMinRun) {
            if (literal_len == 0) {
                literal_start = i;
            }
            ++literal_len;
            ++i;
            continue;
        }
        flush_literals();
        while (run >= kMinRun) {
            auto take = std::min(run, kMaxRun);
            out.push_back(static_cast<char>(0x80 + (take - kMinRun)));
            out.push_back(data[i]);
            run -= take;
            i += take;
        }
        if (run == 1) {
            literal_start = i;
            literal_len = 1;
            ++i;
        }
    }
    flush_literals();
    return out;
}

std::string Rle1Codec::do_decompress(std::string_view data, std::size_t expected_size) const
{
    std::string out;
    out.reserve(expected_size);
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto control = static_cast<std::uint8_t>(data[pos++]);
        if (control < 0x80) {
            std::size_t count = std::size_t{control} + 1;
            if (data.size() - pos < count) {
                raise(ErrorKind::CorruptBlock, "rle1 literal group truncated at byte " + std::to_string(pos - 1));
            }
            out.append(data.substr(pos, count));
            pos += count;
        } else {
            if (pos >= data.size()) {
                raise(ErrorKind::CorruptBlock, "rle1 repeat group truncated at byte " + std::to_string(pos - 1));
            }
            std::size_t count = std::size_t{control} - 0x80 + kMinRun;
            out.append(count, data[pos++]);
        }
        if (out.size() > expected_size) {
            raise(ErrorKind::CorruptBlock, "rle1 stream decodes past the expected " + std::to_string(expected_size) +
                                               " bytes");
        }
    }
    return out;
}

CodecRegistry::CodecRegistry()
{
    add(std::make_shared<StoreCodec>());
    add(std::make_shared<Rle1Codec>());
}

void CodecRegistry::add(std::shared_ptr<const BlockCodec> codec)
{
    auto id = codec->id();
    if (is_reserved(id)) {
        raise(ErrorKind::ReservedId, "codec id " + std::to_string(to_underlying(id)) + " is reserved");
    }
    if (by_id_.contains(to_underlying(id))) {
        raise(ErrorKind::DuplicateCodec, "codec id " + std::to_string(to_underlying(id)) + " is already bound");
    }
    std::string name(codec->name());
    if (by_name_.contains(name)) {
        raise(ErrorKind::DuplicateCodec, "codec name '" + name + "' is already bound");
    }
    by_id_.emplace(to_underlying(id), codec);
    by_name_.emplace(std::move(name), std::move(codec));
}

std::shared_ptr<const BlockCodec> CodecRegistry::resolve(CodecId id) const
{
    if (is_reserved(id)) {
        raise(ErrorKind::ReservedId, "codec id " + std::to_string(to_underlying(id)) + " is reserved");
    }
    auto it = by_id_.find(to_underlying(id));
    if (it == by_id_.end()) {
        raise(ErrorKind::UnknownCodec, "no codec bound to id " + std::to_string(to_underlying(id)));
    }
    return it->second;
}

std::shared_ptr<const BlockCodec> CodecRegistry::resolve(std::string_view name) const
{
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
        raise(ErrorKind::UnknownCodec, "no codec named '" + std::string(name) + "'");
    }
    return it->second;
}

std::shared_ptr<const BlockCodec> CodecRegistry::resolve_spec(std::string_view name_or_id) const
{
    std::uint32_t id = 0;
    auto [end, ec] = std::from_chars(name_or_id.data(), name_or_id.data() + name_or_id.size(), id);
    if (ec == std::errc{} && end == name_or_id.data() + name_or_id.size() && !name_or_id.empty()) {
        return resolve(CodecId{id});
    }
    return resolve(name_or_id);
}

} // namespace splitcodec
