#pragma once

#include "genshift/diffusion.hpp"
#include "genshift/range_space.hpp"
#include "genshift/signal.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace genshift {

/// Everything the sample-blur filters need besides the signals.
struct FilterParams {
    RangeSpace range;
    std::shared_ptr<const BlurOperator> blur;
    int max_iterations = 50;
    /// Mean-shift stopping threshold: max abs change (interval/box) or max
    /// geodesic angle in radians (sphere).
    double tolerance = 1e-4;
    /// Relative floor: a denominator below floor * max denominator falls back.
    double denominator_floor = 1e-12;
    /// Worker threads for the per-sample blurs; 0 uses all hardware threads.
    std::size_t threads = 0;

    void validate() const;
};

struct BilateralResult {
    Signal output;
    std::size_t fallback_count = 0;  ///< elements that kept their input value
    std::size_t clamped_count = 0;   ///< guide values clamped into the range
    std::size_t samples_blurred = 0;
    /// Wall-clock seconds per phase, for benchmarking.
    double partition_seconds = 0.0;
    double blur_seconds = 0.0;
    double accumulate_seconds = 0.0;
};

/// Cross-bilateral filter of f1 guided by f2, evaluated with one blur per
/// range sample and partition-of-unity interpolation. f2 must have the range
/// space's dimension.
BilateralResult generalized_bilateral(const Signal& f1, const Signal& f2, const FilterParams& params);

struct MeanShiftResult {
    Signal output;
    int iterations = 0;
    bool converged = false;
    std::size_t degenerate_count = 0;
    std::size_t clamped_count = 0;
    /// Max element-wise change after each iteration.
    std::vector<double> changes;
};

/// Mode seeking on interval/box ranges. The blurred kernel samples are built
/// from the input once; each iteration only moves the lookup point f^(k)(x).
MeanShiftResult mean_shift_euclidean(const Signal& f, const FilterParams& params);

/// Mode seeking for unit-vector signals with a VMF kernel; iterates are
/// renormalized to unit length.
MeanShiftResult mean_shift_spherical(const Signal& f, const FilterParams& params);

/// Per-element distribution over the range samples; rows sum to one.
class HistogramField {
public:
    HistogramField() = default;
    HistogramField(std::size_t elements, std::size_t bins, std::vector<double> mass);

    std::size_t size() const { return elements_; }
    std::size_t bins() const { return bins_; }
    std::span<const double> row(std::size_t e) const { return {mass_.data() + e * bins_, bins_}; }
    std::span<const double> values() const { return mass_; }

    std::size_t uniform_fallbacks = 0;

private:
    std::size_t elements_ = 0;
    std::size_t bins_ = 0;
    std::vector<double> mass_;
};

/// Local histograms: bin i at x is T[K(p_i, f)](x), weighted by the range
/// quadrature weight of sample i and normalized per element.
HistogramField local_histograms(const Signal& f, const FilterParams& params);

/// Dense reference evaluation of the cross-bilateral integral:
///   sum_y K(x,y) w_y K_G(f2(x), f2(y)) f1(y) / sum_y K(x,y) w_y K_G(f2(x), f2(y)).
/// Refuses more than 5000 elements.
Signal exact_bilateral_oracle(const Signal& f1, const Signal& f2, const Eigen::MatrixXd& spatial_kernel,
                              std::span<const double> quadrature_weights, const RangeKernel& kernel);

/// Same integral on a pixel grid with the truncated Gaussian spatial kernel
/// of GridGaussianBlur, evaluated window by window.
Signal exact_grid_bilateral_oracle(const GridDomain& grid, const Signal& f1, const Signal& f2, double sigma_pixels,
                                   const RangeKernel& kernel);

/// Spatial kernel of a blur as a symmetric matrix: K = M W^{-1} where M is
/// the dense blur matrix and W the quadrature weights.
Eigen::MatrixXd spatial_kernel_matrix(const BlurOperator& blur);

} // namespace genshift
