// Shared basics: error types, axes, small numeric helpers.
#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzsim {

using cplx = std::complex<double>;

// Thrown when inputs are malformed or inconsistent (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a request exceeds an engine's size cap (CLI exit code 3).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by momentum-space operations on open-boundary lattices.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

inline const char* axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default: return "z";
    }
}

inline int popcount64(std::uint64_t v) { return std::popcount(v); }

// Pairwise summation with extended-precision accumulators, in a fixed index
// order. Used wherever reductions must be reproducible and insensitive to
// trajectory/work ordering.
inline long double pairwise_sum_ld(const double* x, std::size_t n) {
    if (n <= 8) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum_ld(x, h) + pairwise_sum_ld(x + h, n - h);
}

inline double pairwise_sum(const double* x, std::size_t n) {
    return static_cast<double>(pairwise_sum_ld(x, n));
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

} // namespace ghzsim
