#pragma once

#include "genshift/mesh.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace genshift {

enum class KernelKind {
    gaussian,         ///< exp(-|p - q|^2 / sigma^2), interval or box
    von_mises_fisher  ///< exp((p . q - 1) / sigma), unit vectors
};

/// Range kernel K_Gamma. `scale` multiplies every value; the filters are
/// ratios, so it never changes their output.
struct RangeKernel {
    KernelKind kind = KernelKind::gaussian;
    double sigma = 0.1;
    double scale = 1.0;

    /// Throws ParameterError unless sigma > 0 and scale > 0.
    void validate() const;
    double operator()(std::span<const double> p, std::span<const double> q) const;
};

/// Checked kernel evaluation: VMF inputs must be unit length within 1e-6.
double kernel_eval(const RangeKernel& kernel, std::span<const double> p, std::span<const double> q);

enum class RangeManifold { interval, box, sphere };
enum class PartitionScheme { hat, spherical_hat, vmf_meshless };
enum class SphereSampling { fibonacci, tetrahedron };

struct PartitionEntry {
    std::uint32_t sample = 0;
    double weight = 0.0;
};

/// Range manifold with samples p_1..p_m, a kernel and a partition of unity.
///
/// - interval: [0, 1] with m equally spaced hat functions
/// - box: [0, 1]^d, tensor product of interval hats (m per axis)
/// - sphere: unit vectors, either hats on a subdivided icosahedron projected
///   radially, or normalized VMF bumps around arbitrary samples
class RangeSpace {
public:
    RangeManifold manifold() const { return manifold_; }
    PartitionScheme scheme() const { return scheme_; }
    std::size_t dimension() const { return dim_; }
    std::size_t sample_count() const { return sample_count_; }
    std::span<const double> sample(std::size_t i) const { return {samples_.data() + i * dim_, dim_}; }
    const RangeKernel& kernel() const { return kernel_; }

    RangeSpace with_kernel(RangeKernel kernel) const;

    /// Clamps interval/box points into [0, 1] (returns true if it had to) and
    /// checks sphere points are unit length within 1e-6 (ValidationError).
    bool project(std::span<double> p) const;

    /// Nonzero partition weights at p, ascending by sample index. p must be projected.
    void partition(std::span<const double> p, std::vector<PartitionEntry>& out) const;
    std::vector<double> partition_dense(std::span<const double> p) const;

    /// Integral of each phi_i over the manifold (sums to the manifold's measure).
    std::span<const double> quadrature_weights() const { return quadrature_; }

    /// Bump width used by the VMF meshless partition (0 for hats).
    double bump_sigma() const { return bump_sigma_; }

    friend RangeSpace interval_range_space(std::size_t m, double sigma);
    friend RangeSpace box_range_space(std::size_t dim, std::size_t m, double sigma);
    friend RangeSpace sphere_polyhedral_range_space(int level, double sigma);
    friend RangeSpace sphere_vmf_range_space(std::size_t m, double sigma, SphereSampling sampling);
    friend RangeSpace sphere_vmf_range_space_from_samples(std::vector<Vec3> samples, double sigma);

private:
    void interval_partition(double p, std::size_t& lo, double& t) const;
    void compute_sphere_quadrature();

    RangeManifold manifold_ = RangeManifold::interval;
    PartitionScheme scheme_ = PartitionScheme::hat;
    std::size_t dim_ = 1;
    std::size_t sample_count_ = 0;
    std::size_t per_axis_ = 0;
    std::vector<double> samples_;
    RangeKernel kernel_;
    std::vector<double> quadrature_;

    // spherical hats: polyhedron faces and inverse vertex matrices
    std::vector<Face> polyhedron_faces_;
    std::vector<Eigen::Matrix3d> face_inverse_;

    double bump_sigma_ = 0.0;
};

RangeSpace interval_range_space(std::size_t m, double sigma);
RangeSpace box_range_space(std::size_t dim, std::size_t m, double sigma);

/// Icosahedron subdivided `level` times (12, 42, 162, ... samples) with VMF kernel width sigma.
RangeSpace sphere_polyhedral_range_space(int level, double sigma);

/// m samples (Fibonacci spiral, or the regular tetrahedron when m == 4 and
/// requested) with normalized VMF bumps whose width is half the mean
/// nearest-neighbor geodesic distance.
RangeSpace sphere_vmf_range_space(std::size_t m, double sigma, SphereSampling sampling = SphereSampling::fibonacci);
RangeSpace sphere_vmf_range_space_from_samples(std::vector<Vec3> samples, double sigma);

/// Icosahedron with `level` midpoint subdivisions, vertices on the unit sphere.
TriangleMesh subdivided_icosahedron(int level);

std::vector<Vec3> fibonacci_sphere(std::size_t m);

/// sum_i sampled[i] * phi_i(p)
double reconstruct(const RangeSpace& space, std::span<const double> sampled, std::span<const double> p);

/// Monte Carlo mean squared error of reconstructing random kernel bumps
/// g(p) = K(p, q) of width `target_sigma` (random centers q, random
/// evaluation points p). An infinite width gives a constant target.
double reconstruction_mse(const RangeSpace& space, double target_sigma, std::size_t trials, std::uint64_t seed);

} // namespace genshift
