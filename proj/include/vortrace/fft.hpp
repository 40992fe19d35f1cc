#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace vortrace {

/// Shared FFTW plans per grid size. Plan creation is serialized (FFTW
/// requirement); execution uses the new-array interface on caller-owned
/// buffers. FFTW_ESTIMATE keeps planning deterministic, which the
/// byte-identical rerun contract needs.
class FftPlans {
  public:
    static const FftPlans& get(int grid) {
        static std::vector<std::unique_ptr<FftPlans>> cache;
        static std::mutex mu;
        std::lock_guard<std::mutex> lock(mu);
        if (cache.size() <= static_cast<std::size_t>(grid))
            cache.resize(static_cast<std::size_t>(grid) + 1);
        auto& slot = cache[static_cast<std::size_t>(grid)];
        if (!slot) slot = std::unique_ptr<FftPlans>(new FftPlans(grid));
        return *slot;
    }

    int grid() const { return grid_; }

    void backward(fftw_complex* data) const { fftw_execute_dft(backward_, data, data); }
    void forward(fftw_complex* data) const { fftw_execute_dft(forward_, data, data); }

    ~FftPlans() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(scratch_);
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

  private:
    explicit FftPlans(int grid) : grid_(grid) {
        const std::size_t n = static_cast<std::size_t>(grid) * grid;
        scratch_ = fftw_alloc_complex(n);
        // sign -1 = FFTW_FORWARD (e^{-2 pi i ...}), +1 = backward synthesis
        forward_ = fftw_plan_dft_2d(grid, grid, scratch_, scratch_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_2d(grid, grid, scratch_, scratch_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!forward_ || !backward_) throw std::runtime_error("FftPlans: planning failed");
    }

    int grid_;
    fftw_complex* scratch_;
    fftw_plan forward_;
    fftw_plan backward_;
};

/// Aligned complex grid buffer bound to the shared plans of its size.
class GridBuffer {
  public:
    explicit GridBuffer(int grid)
        : grid_(grid), plans_(&FftPlans::get(grid)),
          data_(fftw_alloc_complex(static_cast<std::size_t>(grid) * grid)) {
        clear();
    }
    ~GridBuffer() { fftw_free(data_); }

    GridBuffer(const GridBuffer&) = delete;
    GridBuffer& operator=(const GridBuffer&) = delete;
    GridBuffer(GridBuffer&& o) noexcept
        : grid_(o.grid_), plans_(o.plans_), data_(o.data_) {
        o.data_ = nullptr;
    }

    int grid() const { return grid_; }
    std::size_t size() const { return static_cast<std::size_t>(grid_) * grid_; }

    void clear() { std::memset(data_, 0, size() * sizeof(fftw_complex)); }

    std::complex<double>* data() {
        return reinterpret_cast<std::complex<double>*>(data_);
    }
    const std::complex<double>* data() const {
        return reinterpret_cast<const std::complex<double>*>(data_);
    }

    /// Row-major slot of wavevector (k1, k2) wrapped into [0, grid)^2.
    std::size_t slot(int k1, int k2) const {
        const int i1 = ((k1 % grid_) + grid_) % grid_;
        const int i2 = ((k2 % grid_) + grid_) % grid_;
        return static_cast<std::size_t>(i2) * grid_ + i1;
    }

    void synthesize() { plans_->backward(data_); }  // modes -> grid values
    void analyze() { plans_->forward(data_); }      // grid values -> modes * grid^2

  private:
    int grid_;
    const FftPlans* plans_;
    fftw_complex* data_;
};

/// Smallest power of two >= 3N+1: exact dealiasing bound for a quadratic
/// product re-truncated to max(|k1|,|k2|) <= N.
inline int dealias_grid(int cutoff) {
    int need = 3 * cutoff + 1;
    int g = 4;
    while (g < need) g *= 2;
    return g;
}

}  // namespace vortrace
