#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "escrow/errors.hpp"

namespace escrow {

/// Arbitrary-precision non-negative integer; the scalar type used throughout.
/// Operations that state "Natural" in their contract reject negative values.
using Natural = mpz_class;

enum class NumberFormat { dec, hex };

inline std::string to_string(const Natural& n, NumberFormat fmt = NumberFormat::dec) {
    if (fmt == NumberFormat::hex)
        return "0x" + n.get_str(16);
    return n.get_str(10);
}

/// Parses a canonical numeral: decimal with no sign and no leading zeros,
/// or lowercase hex prefixed "0x". Throws parse_error otherwise.
inline Natural parse_natural(const std::string& text) {
    auto fail = [&]() -> Natural {
        throw parse_error("not a canonical numeral: \"" + text + "\"");
    };
    if (text.empty())
        return fail();
    if (text.size() > 2 && text[0] == '0' && text[1] == 'x') {
        const std::string digits = text.substr(2);
        if (digits != "0" && digits[0] == '0')
            return fail();
        for (char ch : digits)
            if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f')))
                return fail();
        return Natural(digits, 16);
    }
    if (text != "0" && text[0] == '0')
        return fail();
    for (char ch : text)
        if (ch < '0' || ch > '9')
            return fail();
    return Natural(text, 10);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

} // namespace escrow
