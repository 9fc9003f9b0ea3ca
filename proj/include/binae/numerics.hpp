// Seeded splittable PRNG and small dense float64 kernels.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace binae {

// Row-major dense matrix of 64-bit floats. Immutable by convention once
// returned from an operation; cheap to copy at the sizes used here.
class Matrix {
   public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

   private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

// Max-subtracted softmax; exact under constant shifts of the input.
inline void softmax_in_place(std::span<double> v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        if (std::isnan(x)) throw std::invalid_argument("softmax: NaN input");
        mx = std::max(mx, x);
    }
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

inline std::vector<double> softmax(const std::vector<double>& v) {
    std::vector<double> out = v;
    softmax_in_place(out);
    return out;
}

namespace detail {

// SplitMix64 finalizer; full-avalanche 64-bit mix.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

}  // namespace detail

// Counter-based generator in the SplitMix family: each (seed, stream) pair
// selects an odd increment and a start point, so purpose-split streams walk
// disjoint arithmetic orbits. Identical (seed, stream) replays identically.
// One Rng instance must be owned by exactly one thread.
class Rng {
   public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        state_ = detail::mix64(seed ^ detail::mix64(stream + detail::kGolden));
        gamma_ = detail::mix64(state_ ^ detail::mix64(~stream)) | 1ull;
    }

    // Derive an independent child stream; the parent is not advanced.
    Rng split(std::uint64_t tag) const { return Rng(seed_, detail::mix64(stream_ ^ (tag + detail::kGolden))); }

    std::uint64_t next_u64() {
        state_ += gamma_;
        return detail::mix64(state_);
    }

    // 53-bit uniform in [0,1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo,hi); the degenerate lo==hi range returns lo.
    double uniform(double lo, double hi) {
        if (lo > hi) throw std::invalid_argument("Rng::uniform: lo > hi");
        if (lo == hi) return lo;
        double v = lo + next_double() * (hi - lo);
        if (v >= hi) v = std::nextafter(hi, lo);  // guard against rounding onto hi
        return v;
    }

    // Uniform integer in [0,bound) via 128-bit multiply-shift.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

   private:
    std::uint64_t seed_, stream_, state_, gamma_;
};

}  // namespace binae
