#include "fft_util.hpp"

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace topo {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

RealFft::RealFft(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("RealFft: length must be >= 2");
    std::lock_guard<std::mutex> lock(plan_mutex());
    real_buf_ = fftw_alloc_real(size_t(n));
    cplx_buf_ = fftw_alloc_complex(size_t(n / 2 + 1));
    if (!real_buf_ || !cplx_buf_) throw std::bad_alloc();
    fwd_ = fftw_plan_dft_r2c_1d(n, real_buf_, cplx_buf_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, cplx_buf_, real_buf_, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("RealFft: plan creation failed");
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
}

void RealFft::forward(const double* in, std::complex<double>* out) {
    std::memcpy(real_buf_, in, size_t(n_) * sizeof(double));
    fftw_execute(fwd_);
    for (int k = 0; k < bins(); ++k) out[k] = {cplx_buf_[k][0], cplx_buf_[k][1]};
}

void RealFft::inverse(const std::complex<double>* in, double* out) {
    for (int k = 0; k < bins(); ++k) {
        cplx_buf_[k][0] = in[k].real();
        cplx_buf_[k][1] = in[k].imag();
    }
    fftw_execute(inv_);
    const double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) out[i] = real_buf_[i] * scale;
}

} // namespace topo
