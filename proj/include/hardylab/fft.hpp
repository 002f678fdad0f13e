#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <vector>

namespace hardylab::fftw {

// Smallest 5-smooth size >= n; FFTW is fast on these.
inline long next_fast_size(long n) {
    for (long c = n;; ++c) {
        long r = c;
        for (const long f : {2L, 3L, 5L})
            while (r % f == 0) r /= f;
        if (r == 1) return c;
    }
}

// Serialized FFTW access with plan reuse. Plans are created with
// FFTW_ESTIMATE only, so planning is deterministic and never depends on
// runtime measurements; execution is single threaded.
class Engine {
public:
    static Engine& instance() {
        static Engine e;
        return e;
    }

    // In-place complex transform of row-major n0 x n1 data (n1 = 1 for 1-D).
    void transform(std::vector<std::complex<double>>& data, long n0, long n1, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        const Key key{n0, n1, sign};
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            Buf& buf = buffer(n0 * n1);
            fftw_plan p = n1 == 1 ? fftw_plan_dft_1d(static_cast<int>(n0), buf.ptr, buf.ptr, sign, FFTW_ESTIMATE)
                                  : fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), buf.ptr, buf.ptr,
                                                     sign, FFTW_ESTIMATE);
            it = plans_.emplace(key, p).first;
        }
        Buf& buf = buffer(n0 * n1);
        std::memcpy(buf.ptr, data.data(), sizeof(fftw_complex) * data.size());
        fftw_execute_dft(it->second, buf.ptr, buf.ptr);
        std::memcpy(data.data(), buf.ptr, sizeof(fftw_complex) * data.size());
    }

private:
    struct Key {
        long n0, n1;
        int sign;
        bool operator<(const Key& o) const {
            if (n0 != o.n0) return n0 < o.n0;
            if (n1 != o.n1) return n1 < o.n1;
            return sign < o.sign;
        }
    };
    struct Buf {
        fftw_complex* ptr = nullptr;
        long size = 0;
        ~Buf() {
            if (ptr) fftw_free(ptr);
        }
    };

    Buf& buffer(long n) {
        if (buf_.size < n) {
            if (buf_.ptr) fftw_free(buf_.ptr);
            buf_.ptr = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)));
            buf_.size = n;
        }
        return buf_;
    }

    std::mutex mu_;
    std::map<Key, fftw_plan> plans_;
    Buf buf_;
};

}  // namespace hardylab::fftw
