#include "fft_conv.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>

#include "lacelab/errors.hpp"

namespace lacelab::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) fail(ErrorCode::budget, "fft buffer allocation failed");
    return FftwBuffer<T>(p);
}

struct Plan {
    fftw_plan p = nullptr;
    ~Plan() {
        if (p) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(p);
        }
    }
};

}  // namespace

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b, int d, int n) {
    std::size_t total = a.size();
    std::vector<int> dims(d, n);
    std::size_t half = total / n * (n / 2 + 1);

    auto ra = fftw_buffer<double>(total);
    auto rb = fftw_buffer<double>(total);
    auto ca = fftw_buffer<fftw_complex>(half);
    auto cb = fftw_buffer<fftw_complex>(half);

    Plan fa, fb, inv;
    {
        std::lock_guard lock(planner_mutex());
        fa.p = fftw_plan_dft_r2c(d, dims.data(), ra.get(), ca.get(), FFTW_ESTIMATE);
        fb.p = fftw_plan_dft_r2c(d, dims.data(), rb.get(), cb.get(), FFTW_ESTIMATE);
        inv.p = fftw_plan_dft_c2r(d, dims.data(), ca.get(), ra.get(), FFTW_ESTIMATE);
    }
    if (!fa.p || !fb.p || !inv.p) fail(ErrorCode::numerical, "fftw planning failed");

    std::copy(a.begin(), a.end(), ra.get());
    std::copy(b.begin(), b.end(), rb.get());
    fftw_execute(fa.p);
    fftw_execute(fb.p);
    for (std::size_t i = 0; i < half; ++i) {
        std::complex<double> x(ca[i][0], ca[i][1]);
        std::complex<double> y(cb[i][0], cb[i][1]);
        auto z = x * y;
        ca[i][0] = z.real();
        ca[i][1] = z.imag();
    }
    fftw_execute(inv.p);
    std::vector<double> out(total);
    double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = ra[i] * scale;
    return out;
}

}  // namespace lacelab::detail
