#include "splitcodec/error.hpp"

namespace splitcodec {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::OversizeBlock: return "OversizeBlock";
    case ErrorKind::CodecFailure: return "CodecFailure";
    case ErrorKind::CorruptBlock: return "CorruptBlock";
    case ErrorKind::UnknownCodec: return "UnknownCodec";
    case ErrorKind::ReservedId: return "ReservedId";
    case ErrorKind::DuplicateCodec: return "DuplicateCodec";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::EmptyPlan: return "EmptyPlan";
    case ErrorKind::BadPlan: return "BadPlan";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::BadVersion: return "BadVersion";
    case ErrorKind::BadHeader: return "BadHeader";
    case ErrorKind::CrcMismatch: return "CrcMismatch";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::IndexInconsistent: return "IndexInconsistent";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::MissingCommand: return "MissingCommand";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::BadKey: return "BadKey";
    case ErrorKind::BadValue: return "BadValue";
    case ErrorKind::ToolNotFound: return "ToolNotFound";
    case ErrorKind::ToolFailed: return "ToolFailed";
    case ErrorKind::OutputMissing: return "OutputMissing";
    case ErrorKind::StagingFailure: return "StagingFailure";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnexpectedEof: return "UnexpectedEof";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail)
{
}

void raise(ErrorKind kind, const std::string& detail)
{
    throw Error(kind, detail);
}

} // namespace splitcodec
