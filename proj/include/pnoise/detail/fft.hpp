#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <mutex>
#include <new>
#include <stdexcept>
#include <vector>

namespace pnoise::detail {

// FFTW's planner is not re-entrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

template <class T>
struct FftwBuffer {
    T* ptr = nullptr;
    explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
        if (ptr == nullptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

/// Forward real-to-half-complex transform of fixed length n; output has
/// n/2 + 1 bins, unnormalized.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n), in_(n), out_(n / 2 + 1) {
        if (n < 2) throw std::invalid_argument("RealFft: length must be >= 2");
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.ptr, out_.ptr, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw std::runtime_error("RealFft: FFTW planning failed");
    }
    ~RealFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return n_; }
    double* input() { return in_.ptr; }

    /// Runs on the current input buffer and returns |X_k|^2 for k = 0..n/2.
    void power(std::vector<double>& out) {
        fftw_execute(plan_);
        out.resize(n_ / 2 + 1);
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] = out_.ptr[k][0] * out_.ptr[k][0] + out_.ptr[k][1] * out_.ptr[k][1];
        }
    }

private:
    std::size_t n_;
    FftwBuffer<double> in_;
    FftwBuffer<fftw_complex> out_;
    fftw_plan plan_ = nullptr;
};

/// In-place complex transform. sign = -1 forward, +1 backward; unnormalized.
class ComplexFft {
public:
    ComplexFft(std::size_t n, int sign) : n_(n), buf_(n) {
        if (n < 1) throw std::invalid_argument("ComplexFft: empty length");
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_.ptr, buf_.ptr,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw std::runtime_error("ComplexFft: FFTW planning failed");
    }
    ~ComplexFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    std::size_t size() const { return n_; }
    // fftw_complex is layout-compatible with std::complex<double>.
    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_.ptr); }
    void execute() { fftw_execute(plan_); }

private:
    std::size_t n_;
    FftwBuffer<fftw_complex> buf_;
    fftw_plan plan_ = nullptr;
};

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Linear convolution of a long complex signal with a short real FIR via
/// overlap-add. Output length x.size() + h.size() - 1.
inline std::vector<std::complex<double>> convolve(const std::vector<std::complex<double>>& x,
                                                  const std::vector<double>& h) {
    if (x.empty() || h.empty()) return {};
    const std::size_t m = h.size();
    const std::size_t nfft = next_pow2(std::max<std::size_t>(4 * m, 4096));
    const std::size_t block = nfft - m + 1;
    ComplexFft fwd(nfft, -1);
    ComplexFft inv(nfft, +1);

    std::vector<std::complex<double>> hf(nfft);
    {
        auto* d = fwd.data();
        for (std::size_t i = 0; i < nfft; ++i) d[i] = i < m ? h[i] : 0.0;
        fwd.execute();
        for (std::size_t i = 0; i < nfft; ++i) hf[i] = d[i] / static_cast<double>(nfft);
    }

    std::vector<std::complex<double>> y(x.size() + m - 1);
    for (std::size_t start = 0; start < x.size(); start += block) {
        const std::size_t len = std::min(block, x.size() - start);
        auto* d = fwd.data();
        for (std::size_t i = 0; i < nfft; ++i) d[i] = i < len ? x[start + i] : 0.0;
        fwd.execute();
        auto* e = inv.data();
        for (std::size_t i = 0; i < nfft; ++i) e[i] = d[i] * hf[i];
        inv.execute();
        const std::size_t outlen = std::min(len + m - 1, y.size() - start);
        for (std::size_t i = 0; i < outlen; ++i) y[start + i] += e[i];
    }
    return y;
}

}  // namespace pnoise::detail
