#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splitcodec {

enum class ErrorKind {
    // codec_core
    OversizeBlock,
    CodecFailure,
    CorruptBlock,
    UnknownCodec,
    ReservedId,
    DuplicateCodec,
    // container
    IoFailure,
    EmptyPlan,
    BadPlan,
    BadMagic,
    BadVersion,
    BadHeader,
    CrcMismatch,
    TruncatedFile,
    IndexInconsistent,
    OutOfRange,
    // external_codec
    MissingCommand,
    DuplicateName,
    BadKey,
    BadValue,
    ToolNotFound,
    ToolFailed,
    OutputMissing,
    StagingFailure,
    SizeMismatch,
    // record_io
    MalformedRecord,
    UnexpectedEof,
    // split_planner
    BadParams,
    LengthMismatch,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. The kind is stable and machine-readable;
/// what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& detail);

} // namespace splitcodec
