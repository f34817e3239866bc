#pragma once

#include <gtest/gtest.h>

#include <bkio/error.hpp>

namespace bkio::testing {

template <typename Fn>
ErrorCode code_of(Fn&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no bkio::Error thrown";
    return ErrorCode::io_failure;
}

} // namespace bkio::testing
