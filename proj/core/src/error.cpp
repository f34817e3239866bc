#include <bkio/error.hpp>

namespace bkio {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::unsupported_version: return "unsupported version";
    case ErrorCode::bad_magic: return "bad magic";
    case ErrorCode::bad_trailer: return "bad trailer";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::invalid_index: return "invalid index";
    case ErrorCode::size_mismatch: return "size mismatch";
    case ErrorCode::corrupt_frame: return "corrupt frame";
    case ErrorCode::codec_failure: return "codec failure";
    case ErrorCode::invalid_config: return "invalid config";
    case ErrorCode::type_mismatch: return "type mismatch";
    case ErrorCode::out_of_range: return "out of range";
    case ErrorCode::unsupported_shape: return "unsupported shape";
    case ErrorCode::stale_view: return "stale view";
    case ErrorCode::writer_closed: return "writer closed";
    case ErrorCode::pool_shutdown: return "pool shutdown";
    case ErrorCode::io_failure: return "io failure";
    }
    return "unknown";
}

} // namespace bkio
