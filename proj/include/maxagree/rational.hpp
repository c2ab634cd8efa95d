#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "maxagree/errors.hpp"

namespace maxagree {

/// Exact rational number. All arithmetic in the library is exact; no
/// floating point appears outside of report rendering.
using Rat = mpq_class;

/// Parse "p/q" or "p" (optional leading '-') into a canonical rational.
/// Throws ValidationError on empty/garbled input or zero denominator.
Rat parse_rational(const std::string& text);

/// Render as "p/q" with explicit denominator, canonical and unique
/// per value ("0/1", "1/1", "-3/4").
std::string format_rational(const Rat& r);

/// r as a double, for report rendering only.
double to_double(const Rat& r);

/// k / 2^64 as an exact rational, for driving the sampler from a
/// 64-bit PRNG draw.
Rat dyadic64(std::uint64_t k);

inline Rat rat(long num, long den = 1) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

} // namespace maxagree
