#pragma once

#include "genshift/mesh.hpp"
#include "genshift/signal.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace genshift {

/// Symmetric sparse operator; Laplacians here are positive semidefinite with
/// constants in the kernel.
struct SparseOperator {
    Eigen::SparseMatrix<double> matrix;

    std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Positive diagonal mass (quadrature) matrix.
struct MassMatrix {
    Eigen::VectorXd diagonal;

    std::size_t size() const { return static_cast<std::size_t>(diagonal.size()); }
};

struct LaplacianPair {
    SparseOperator laplacian;
    MassMatrix mass;
};

/// Linear blur acting channel-wise on per-element signals.
///
/// Rows of the operator act as the spatial kernel in the bilateral filters.
/// Implementations are immutable and `apply` may be called concurrently.
class BlurOperator {
public:
    virtual ~BlurOperator() = default;

    virtual std::size_t size() const = 0;

    /// Blurs every column of `in` (one row per element).
    virtual RowMatrix apply(const Eigen::Ref<const RowMatrix>& in) const = 0;

    /// Per-element integration weights matching the operator's discretization.
    virtual std::span<const double> quadrature_weights() const = 0;

    Signal apply(const Signal& s) const;
};

/// Cotangent Laplacian with barycentric dual areas. Cotangents are clamped to [-100, 100].
LaplacianPair build_cotan_laplacian(const TriangleMesh& mesh);

/// Dual 0-form Laplacian on faces: weight |e| / |c_f - c_g| per shared edge,
/// face areas as mass. Throws NonManifoldError for edges with more than two faces.
LaplacianPair build_face_dual_laplacian(const TriangleMesh& mesh);

struct KnnLaplacian {
    SparseOperator laplacian;
    MassMatrix mass;
    std::size_t duplicate_pairs = 0;  ///< neighbor pairs at identical coordinates
};

/// Symmetrized k-nearest-neighbor graph Laplacian with weights exp(-d^2 / t)
/// and identity mass.
KnnLaplacian build_knn_graph_laplacian(const OrientedPointCloud& cloud, std::size_t k, double t);

/// Mean distance from each point to its k nearest neighbors.
double mean_neighbor_distance(const OrientedPointCloud& cloud, std::size_t k);

/// One (or `steps`) implicit heat step: u solves (A + dt L) u = A v.
class HeatStepOperator final : public BlurOperator {
public:
    HeatStepOperator(const SparseOperator& laplacian, const MassMatrix& mass, double dt, int steps = 1);
    ~HeatStepOperator() override;

    HeatStepOperator(const HeatStepOperator&) = delete;
    HeatStepOperator& operator=(const HeatStepOperator&) = delete;

    std::size_t size() const override { return n_; }
    using BlurOperator::apply;
    RowMatrix apply(const Eigen::Ref<const RowMatrix>& in) const override;
    std::span<const double> quadrature_weights() const override { return weights_; }

    double time_step() const { return dt_; }
    int steps() const { return steps_; }

private:
    struct Factorization;

    std::size_t n_ = 0;
    double dt_ = 0.0;
    int steps_ = 1;
    Eigen::VectorXd mass_;
    std::vector<double> weights_;
    std::unique_ptr<Factorization> factorization_;
};

std::shared_ptr<const HeatStepOperator> heat_step(
    const SparseOperator& laplacian, const MassMatrix& mass, double dt, int steps = 1);

/// Separable truncated Gaussian (radius ceil(3 sigma)) with per-pixel
/// renormalization at the image border.
class GridGaussianBlur final : public BlurOperator {
public:
    GridGaussianBlur(GridDomain grid, double sigma_pixels);

    std::size_t size() const override { return grid_.size(); }
    using BlurOperator::apply;
    RowMatrix apply(const Eigen::Ref<const RowMatrix>& in) const override;
    std::span<const double> quadrature_weights() const override { return weights_; }

    const GridDomain& grid() const { return grid_; }
    double sigma() const { return sigma_; }
    int radius() const { return radius_; }
    /// Unnormalized 1D taps, index 0 is the center.
    std::span<const double> taps() const { return taps_; }

private:
    GridDomain grid_;
    double sigma_;
    int radius_;
    std::vector<double> taps_;
    std::vector<double> weights_;
};

std::shared_ptr<const GridGaussianBlur> build_grid_blur(GridDomain grid, double sigma_pixels);

/// v -> (1 + gain) v - gain T(v). Preserves constants whenever T does.
class UnsharpOperator final : public BlurOperator {
public:
    UnsharpOperator(std::shared_ptr<const BlurOperator> blur, double gain);

    std::size_t size() const override { return blur_->size(); }
    using BlurOperator::apply;
    RowMatrix apply(const Eigen::Ref<const RowMatrix>& in) const override;
    std::span<const double> quadrature_weights() const override { return blur_->quadrature_weights(); }

    double gain() const { return gain_; }

private:
    std::shared_ptr<const BlurOperator> blur_;
    double gain_;
};

std::shared_ptr<const BlurOperator> substitute_kernel_unsharp(std::shared_ptr<const BlurOperator> blur, double gain);

/// Heat time for a spatial width given in multiples of a reference length:
/// dt = (sigma * length)^2 / 2.
double diffusion_time(double sigma, double reference_length);

/// Dense matrix of a blur (column j = blur of indicator j). Refuses above 5000 elements.
Eigen::MatrixXd dense_blur_matrix(const BlurOperator& blur);

} // namespace genshift
