#pragma once

#include <gmpxx.h>

#include <string>

namespace floquet {

// Arbitrary-precision rational, always in lowest terms with positive
// denominator (mpq canonical form; helpers below canonicalize on entry).
using BigRational = mpq_class;

inline BigRational make_rational(long num, long den = 1) {
    BigRational r(num, den);
    r.canonicalize();
    return r;
}

// Parses "num/den" or a bare integer "num".
BigRational rational_from_string(const std::string& s);

// Always "num/den", e.g. "-1/24", "1/1".
std::string rational_to_string(const BigRational& r);

inline double to_double(const BigRational& r) { return r.get_d(); }

}  // namespace floquet
