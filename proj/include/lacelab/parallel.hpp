#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace lacelab {

void set_threads(int n);
int threads();

// Splits [0, n) into contiguous chunks, one per worker. Chunk boundaries depend
// only on n and the worker count, never on timing.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Neumaier compensated accumulator.
class KahanSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            c_ += (sum_ - t) + v;
        else
            c_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

}  // namespace lacelab
