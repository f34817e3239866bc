#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bkio {

enum class ErrorCode {
    unsupported_version,
    bad_magic,
    bad_trailer,
    truncated,
    invalid_index,
    size_mismatch,
    corrupt_frame,
    codec_failure,
    invalid_config,
    type_mismatch,
    out_of_range,
    unsupported_shape,
    stale_view,
    writer_closed,
    pool_shutdown,
    io_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the C boundary) can branch on the kind without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace bkio
