#pragma once

#include "ach/error.hpp"

#include "doctest.h"

#include <optional>

// Code of the ach::Error thrown by f, or nullopt when f returns normally.
template <typename F>
std::optional<ach::ErrorCode> error_of(F&& f)
{
    try {
        f();
    } catch (const ach::Error& e) {
        return e.code();
    }
    return std::nullopt;
}
