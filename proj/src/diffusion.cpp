#include "genshift/diffusion.hpp"

#include "genshift/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/SparseCholesky>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <string>
#include <utility>

namespace genshift {

namespace {

constexpr double kCotangentClamp = 100.0;

using Triplet = Eigen::Triplet<double>;

// Builds L from symmetric off-diagonal weights: L_ij = -w_ij, L_ii = sum_j w_ij.
SparseOperator laplacian_from_weights(std::size_t n, const std::vector<Triplet>& weights)
{
    Eigen::SparseMatrix<double> off(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    off.setFromTriplets(weights.begin(), weights.end());

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(off.nonZeros()) + n);
    Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index col = 0; col < off.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(off, col); it; ++it) {
            entries.emplace_back(it.row(), it.col(), -it.value());
            diagonal[it.row()] += it.value();
        }
    }
    for (Eigen::Index i = 0; i < diagonal.size(); ++i) entries.emplace_back(i, i, diagonal[i]);

    SparseOperator op;
    op.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    op.matrix.setFromTriplets(entries.begin(), entries.end());
    op.matrix.makeCompressed();
    return op;
}

double clamped_cotangent(const Vec3& u, const Vec3& v)
{
    const double c = u.dot(v) / u.cross(v).norm();
    return std::clamp(c, -kCotangentClamp, kCotangentClamp);
}

} // namespace

Signal BlurOperator::apply(const Signal& s) const
{
    if (s.size() != size()) {
        throw ShapeError("blur expects " + std::to_string(size()) + " elements, got " + std::to_string(s.size()));
    }
    return Signal::from_matrix(s.kind(), apply(s.matrix()));
}

LaplacianPair build_cotan_laplacian(const TriangleMesh& mesh)
{
    std::vector<Triplet> weights;
    weights.reserve(mesh.face_count() * 6);
    const auto& x = mesh.positions();
    for (const Face& f : mesh.faces()) {
        for (int k = 0; k < 3; ++k) {
            const std::size_t i = f[(k + 1) % 3];
            const std::size_t j = f[(k + 2) % 3];
            const std::size_t o = f[k];
            const double w = 0.5 * clamped_cotangent(x[i] - x[o], x[j] - x[o]);
            weights.emplace_back(i, j, w);
            weights.emplace_back(j, i, w);
        }
    }
    LaplacianPair out;
    out.laplacian = laplacian_from_weights(mesh.vertex_count(), weights);
    const auto dual = mesh.dual_areas();
    out.mass.diagonal = Eigen::Map<const Eigen::VectorXd>(dual.data(), static_cast<Eigen::Index>(dual.size()));
    return out;
}

LaplacianPair build_face_dual_laplacian(const TriangleMesh& mesh)
{
    std::vector<Triplet> weights;
    const auto& x = mesh.positions();
    const auto& c = mesh.face_centroids();
    for (const MeshEdge& e : mesh.edges()) {
        if (e.faces.size() > 2) throw NonManifoldError(e.v0, e.v1, e.faces.size());
        if (e.faces.size() < 2) continue;
        const std::size_t f = e.faces[0];
        const std::size_t g = e.faces[1];
        const double w = (x[e.v1] - x[e.v0]).norm() / (c[f] - c[g]).norm();
        weights.emplace_back(f, g, w);
        weights.emplace_back(g, f, w);
    }
    LaplacianPair out;
    out.laplacian = laplacian_from_weights(mesh.face_count(), weights);
    const auto areas = mesh.face_areas();
    out.mass.diagonal = Eigen::Map<const Eigen::VectorXd>(areas.data(), static_cast<Eigen::Index>(areas.size()));
    return out;
}

namespace {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using RPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using RValue = std::pair<RPoint, std::size_t>;

// k nearest neighbors of every point, excluding the point itself, ordered by
// (distance, index).
std::vector<std::vector<std::size_t>> knn(const OrientedPointCloud& cloud, std::size_t k)
{
    const auto& pts = cloud.points();
    std::vector<RValue> values;
    values.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) values.emplace_back(RPoint(pts[i].x(), pts[i].y(), pts[i].z()), i);
    bgi::rtree<RValue, bgi::quadratic<16>> tree(values.begin(), values.end());

    std::vector<std::vector<std::size_t>> out(pts.size());
    std::vector<RValue> hits;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        // Over-query so that coincident points cannot crowd out the cut ordering.
        hits.clear();
        tree.query(bgi::nearest(values[i].first, static_cast<unsigned>(k + 1)), std::back_inserter(hits));
        std::vector<std::pair<double, std::size_t>> ranked;
        for (const RValue& h : hits) {
            if (h.second == i) continue;
            ranked.emplace_back((pts[h.second] - pts[i]).squaredNorm(), h.second);
        }
        std::sort(ranked.begin(), ranked.end());
        if (ranked.size() > k) ranked.resize(k);
        for (const auto& r : ranked) out[i].push_back(r.second);
    }
    return out;
}

} // namespace

KnnLaplacian build_knn_graph_laplacian(const OrientedPointCloud& cloud, std::size_t k, double t)
{
    if (k < 3) throw ParameterError("kNN Laplacian needs k >= 3");
    if (!(t > 0.0)) throw ParameterError("kNN Laplacian needs t > 0");
    if (cloud.size() < k + 1) {
        throw ParameterError("kNN Laplacian needs at least k + 1 = " + std::to_string(k + 1) + " points");
    }
    const auto neighbors = knn(cloud, k);
    std::map<std::pair<std::size_t, std::size_t>, double> edges;
    const auto& pts = cloud.points();
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        for (std::size_t j : neighbors[i]) {
            const auto key = std::minmax(i, j);
            edges.try_emplace(key, (pts[i] - pts[j]).squaredNorm());
        }
    }
    KnnLaplacian out;
    std::vector<Triplet> weights;
    weights.reserve(2 * edges.size());
    for (const auto& [key, d2] : edges) {
        if (d2 == 0.0) ++out.duplicate_pairs;
        const double w = std::exp(-d2 / t);
        weights.emplace_back(key.first, key.second, w);
        weights.emplace_back(key.second, key.first, w);
    }
    out.laplacian = laplacian_from_weights(cloud.size(), weights);
    out.mass.diagonal = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cloud.size()));
    return out;
}

double mean_neighbor_distance(const OrientedPointCloud& cloud, std::size_t k)
{
    if (cloud.size() < k + 1 || k == 0) throw ParameterError("mean_neighbor_distance: not enough points");
    const auto neighbors = knn(cloud, k);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        for (std::size_t j : neighbors[i]) {
            sum += (cloud.points()[i] - cloud.points()[j]).norm();
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

struct HeatStepOperator::Factorization {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

HeatStepOperator::HeatStepOperator(const SparseOperator& laplacian, const MassMatrix& mass, double dt, int steps)
    : n_(laplacian.size()), dt_(dt), steps_(steps), mass_(mass.diagonal),
      factorization_(std::make_unique<Factorization>())
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("heat step needs a positive finite time step");
    if (steps < 1) throw ParameterError("heat step needs at least one step");
    if (mass.size() != n_) throw ShapeError("heat step: mass and Laplacian sizes differ");
    if (!(mass_.minCoeff() > 0.0)) throw ValidationError("heat step: mass matrix must be positive");

    Eigen::SparseMatrix<double> system = (dt / steps) * laplacian.matrix;
    for (Eigen::Index i = 0; i < mass_.size(); ++i) system.coeffRef(i, i) += mass_[i];
    system.makeCompressed();
    factorization_->solver.compute(system);
    if (factorization_->solver.info() != Eigen::Success) {
        throw NumericalError("heat step factorization failed");
    }
    weights_.assign(mass_.data(), mass_.data() + mass_.size());
}

HeatStepOperator::~HeatStepOperator() = default;

RowMatrix HeatStepOperator::apply(const Eigen::Ref<const RowMatrix>& in) const
{
    if (static_cast<std::size_t>(in.rows()) != n_) throw ShapeError("heat step: element count mismatch");
    Eigen::MatrixXd u = in;
    for (int s = 0; s < steps_; ++s) {
        const Eigen::MatrixXd rhs = mass_.asDiagonal() * u;
        u = factorization_->solver.solve(rhs);
    }
    if (factorization_->solver.info() != Eigen::Success) throw NumericalError("heat step solve failed");
    return u;
}

std::shared_ptr<const HeatStepOperator> heat_step(
    const SparseOperator& laplacian, const MassMatrix& mass, double dt, int steps)
{
    return std::make_shared<const HeatStepOperator>(laplacian, mass, dt, steps);
}

GridGaussianBlur::GridGaussianBlur(GridDomain grid, double sigma_pixels) : grid_(grid), sigma_(sigma_pixels)
{
    if (!(sigma_pixels > 0.0) || !std::isfinite(sigma_pixels)) {
        throw ParameterError("grid blur needs sigma > 0");
    }
    radius_ = static_cast<int>(std::ceil(3.0 * sigma_pixels));
    taps_.resize(static_cast<std::size_t>(radius_) + 1);
    for (int r = 0; r <= radius_; ++r) taps_[r] = std::exp(-0.5 * r * r / (sigma_pixels * sigma_pixels));
    weights_.assign(grid.size(), 1.0);
}

RowMatrix GridGaussianBlur::apply(const Eigen::Ref<const RowMatrix>& in) const
{
    if (static_cast<std::size_t>(in.rows()) != grid_.size()) throw ShapeError("grid blur: element count mismatch");
    const auto w = static_cast<long>(grid_.width);
    const auto h = static_cast<long>(grid_.height);
    const Eigen::Index channels = in.cols();
    RowMatrix tmp(in.rows(), channels);
    RowMatrix out(in.rows(), channels);
    Eigen::RowVectorXd acc(channels);

    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            acc.setZero();
            double norm = 0.0;
            for (long d = -radius_; d <= radius_; ++d) {
                const long xx = x + d;
                if (xx < 0 || xx >= w) continue;
                const double k = taps_[static_cast<std::size_t>(std::abs(d))];
                acc += k * in.row(y * w + xx);
                norm += k;
            }
            tmp.row(y * w + x) = acc / norm;
        }
    }
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            acc.setZero();
            double norm = 0.0;
            for (long d = -radius_; d <= radius_; ++d) {
                const long yy = y + d;
                if (yy < 0 || yy >= h) continue;
                const double k = taps_[static_cast<std::size_t>(std::abs(d))];
                acc += k * tmp.row(yy * w + x);
                norm += k;
            }
            out.row(y * w + x) = acc / norm;
        }
    }
    return out;
}

std::shared_ptr<const GridGaussianBlur> build_grid_blur(GridDomain grid, double sigma_pixels)
{
    return std::make_shared<const GridGaussianBlur>(grid, sigma_pixels);
}

UnsharpOperator::UnsharpOperator(std::shared_ptr<const BlurOperator> blur, double gain)
    : blur_(std::move(blur)), gain_(gain)
{
    if (!blur_) throw ParameterError("unsharp operator needs a blur");
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw ParameterError("unsharp gain must be >= 0");
}

RowMatrix UnsharpOperator::apply(const Eigen::Ref<const RowMatrix>& in) const
{
    if (gain_ == 0.0) return in;
    return (1.0 + gain_) * in - gain_ * blur_->apply(in);
}

std::shared_ptr<const BlurOperator> substitute_kernel_unsharp(std::shared_ptr<const BlurOperator> blur, double gain)
{
    return std::make_shared<const UnsharpOperator>(std::move(blur), gain);
}

double diffusion_time(double sigma, double reference_length)
{
    const double s = sigma * reference_length;
    return 0.5 * s * s;
}

Eigen::MatrixXd dense_blur_matrix(const BlurOperator& blur)
{
    const std::size_t n = blur.size();
    if (n > 5000) throw ParameterError("dense blur matrix refused for " + std::to_string(n) + " > 5000 elements");
    const RowMatrix identity = RowMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return blur.apply(identity);
}

} // namespace genshift
