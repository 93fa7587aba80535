#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

namespace topo {

/// Reusable real<->complex FFT of a fixed length. FFTW plan creation is not
/// thread-safe, so plans are built under a global mutex; execution on the
/// instance's own buffers is confined to the owning thread.
class RealFft {
public:
    explicit RealFft(int n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    int size() const { return n_; }
    int bins() const { return n_ / 2 + 1; }

    /// input: n samples; output: n/2+1 complex bins.
    void forward(const double* in, std::complex<double>* out);

    /// input: n/2+1 complex bins; output: n samples, scaled by 1/n so that
    /// inverse(forward(x)) == x.
    void inverse(const std::complex<double>* in, double* out);

private:
    int n_;
    double* real_buf_;
    fftw_complex* cplx_buf_;
    fftw_plan fwd_;
    fftw_plan inv_;
};

} // namespace topo
