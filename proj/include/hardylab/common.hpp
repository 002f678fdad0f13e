#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hardylab {

using Vec = std::array<double, 2>;

// Config-layer failures (CLI exit code 3).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric-layer failures (CLI exit code 4).
struct containment_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct calibration_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double norm2(const Vec& v, int dim) {
    return dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]);
}

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = a[0] * b[0];
    if (dim > 1) s += a[1] * b[1];
    return s;
}

// Compensated (Kahan) accumulator. All reductions in the library run
// through this sequentially in a fixed lexicographic order so results
// are bit-reproducible regardless of the worker count.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Surface measure of the unit sphere S^{n-1}, n in {1,2}.
inline double sphere_measure(int dim) {
    if (dim == 1) return 2.0;
    if (dim == 2) return 2.0 * M_PI;
    throw std::invalid_argument("sphere_measure: dim must be 1 or 2");
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace par {

inline int& worker_slot() {
    static int workers = 1;
    return workers;
}

inline void set_workers(int n) { worker_slot() = n < 1 ? 1 : n; }
inline int workers() { return worker_slot(); }

inline int hardware_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// Data-parallel map over [0, n). Each index writes only its own outputs,
// so the partition cannot affect results.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int w = workers();
    if (w <= 1 || n < 2048) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    const std::size_t chunk = (n + static_cast<std::size_t>(w) - 1) / static_cast<std::size_t>(w);
    for (int t = 0; t < w; ++t) {
        const std::size_t lo = chunk * static_cast<std::size_t>(t);
        if (lo >= n) break;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace par
}  // namespace hardylab
