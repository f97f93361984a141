#include "genshift/range_space.hpp"

#include "genshift/errors.hpp"
#include "genshift/random.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>

namespace genshift {

namespace {

constexpr std::size_t kSphereQuadraturePoints = 20000;

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

void RangeKernel::validate() const
{
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("range kernel width must be > 0");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("range kernel scale must be > 0");
}

double RangeKernel::operator()(std::span<const double> p, std::span<const double> q) const
{
    if (kind == KernelKind::von_mises_fisher) return scale * std::exp((dot(p, q) - 1.0) / sigma);
    double d2 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        d2 += d * d;
    }
    return scale * std::exp(-d2 / (sigma * sigma));
}

double kernel_eval(const RangeKernel& kernel, std::span<const double> p, std::span<const double> q)
{
    kernel.validate();
    if (p.size() != q.size()) throw ShapeError("kernel_eval: point dimensions differ");
    if (kernel.kind == KernelKind::von_mises_fisher) {
        if (std::abs(std::sqrt(dot(p, p)) - 1.0) > 1e-6 || std::abs(std::sqrt(dot(q, q)) - 1.0) > 1e-6) {
            throw ValidationError("von Mises-Fisher kernel needs unit vectors");
        }
    }
    return kernel(p, q);
}

RangeSpace RangeSpace::with_kernel(RangeKernel kernel) const
{
    kernel.validate();
    RangeSpace copy = *this;
    copy.kernel_ = kernel;
    return copy;
}

bool RangeSpace::project(std::span<double> p) const
{
    if (p.size() != dim_) throw ShapeError("range point has the wrong dimension");
    if (manifold_ == RangeManifold::sphere) {
        const double n = std::sqrt(dot(p, p));
        if (std::abs(n - 1.0) > 1e-6) throw ValidationError("sphere range value is not unit length");
        for (double& x : p) x /= n;
        return false;
    }
    bool clamped = false;
    for (double& x : p) {
        if (x < 0.0 || x > 1.0) {
            x = std::clamp(x, 0.0, 1.0);
            clamped = true;
        }
    }
    return clamped;
}

void RangeSpace::interval_partition(double p, std::size_t& lo, double& t) const
{
    const double scaled = p * static_cast<double>(per_axis_ - 1);
    const double nearest = std::round(scaled);
    const double snapped = std::abs(scaled - nearest) < 1e-12 * static_cast<double>(per_axis_) ? nearest : scaled;
    const double base = std::min(std::floor(snapped), static_cast<double>(per_axis_ - 2));
    lo = static_cast<std::size_t>(std::max(base, 0.0));
    t = snapped - static_cast<double>(lo);
}

void RangeSpace::partition(std::span<const double> p, std::vector<PartitionEntry>& out) const
{
    out.clear();
    switch (scheme_) {
    case PartitionScheme::hat: {
        // Tensor product of 1D hats; dim 1 is the interval.
        std::vector<std::pair<std::size_t, double>> combos{{0, 1.0}};
        std::size_t stride = 1;
        for (std::size_t axis = 0; axis < dim_; ++axis) {
            std::size_t lo = 0;
            double t = 0.0;
            interval_partition(p[axis], lo, t);
            std::vector<std::pair<std::size_t, double>> next;
            for (const auto& [index, weight] : combos) {
                if (t < 1.0) next.emplace_back(index + lo * stride, weight * (1.0 - t));
                if (t > 0.0) next.emplace_back(index + (lo + 1) * stride, weight * t);
            }
            combos = std::move(next);
            stride *= per_axis_;
        }
        std::sort(combos.begin(), combos.end());
        for (const auto& [index, weight] : combos) {
            if (weight > 0.0) out.push_back({static_cast<std::uint32_t>(index), weight});
        }
        return;
    }
    case PartitionScheme::spherical_hat: {
        const Eigen::Vector3d dir(p[0], p[1], p[2]);
        for (std::size_t f = 0; f < polyhedron_faces_.size(); ++f) {
            Eigen::Vector3d w = face_inverse_[f] * dir;
            if (w.minCoeff() < -1e-12) continue;
            const double sum = w.sum();
            if (!(sum > 0.0)) continue;
            for (int k = 0; k < 3; ++k) w[k] = w[k] < 1e-13 * sum ? 0.0 : w[k];
            w /= w.sum();
            std::array<PartitionEntry, 3> entries;
            for (int k = 0; k < 3; ++k) {
                entries[k] = {static_cast<std::uint32_t>(polyhedron_faces_[f][k]), w[k]};
            }
            std::sort(entries.begin(), entries.end(),
                      [](const PartitionEntry& a, const PartitionEntry& b) { return a.sample < b.sample; });
            for (const auto& e : entries) {
                if (e.weight > 0.0) out.push_back(e);
            }
            return;
        }
        throw Error("spherical partition: no polyhedron face contains the query direction");
    }
    case PartitionScheme::vmf_meshless: {
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> dots(sample_count_);
        for (std::size_t i = 0; i < sample_count_; ++i) {
            dots[i] = dot(sample(i), p);
            best = std::max(best, dots[i]);
        }
        double sum = 0.0;
        for (double& d : dots) {
            d = std::exp((d - best) / bump_sigma_);
            sum += d;
        }
        for (std::size_t i = 0; i < sample_count_; ++i) {
            const double w = dots[i] / sum;
            if (w > 0.0) out.push_back({static_cast<std::uint32_t>(i), w});
        }
        return;
    }
    }
}

std::vector<double> RangeSpace::partition_dense(std::span<const double> p) const
{
    std::vector<PartitionEntry> entries;
    partition(p, entries);
    std::vector<double> dense(sample_count_, 0.0);
    for (const auto& e : entries) dense[e.sample] = e.weight;
    return dense;
}

void RangeSpace::compute_sphere_quadrature()
{
    const auto lattice = fibonacci_sphere(kSphereQuadraturePoints);
    quadrature_.assign(sample_count_, 0.0);
    std::vector<PartitionEntry> entries;
    for (const Vec3& q : lattice) {
        partition(std::span<const double>(q.data(), 3), entries);
        for (const auto& e : entries) quadrature_[e.sample] += e.weight;
    }
    const double cell = 4.0 * std::numbers::pi / static_cast<double>(lattice.size());
    for (double& w : quadrature_) w *= cell;
}

RangeSpace interval_range_space(std::size_t m, double sigma)
{
    return box_range_space(1, m, sigma);
}

RangeSpace box_range_space(std::size_t dim, std::size_t m, double sigma)
{
    if (m < 2) throw ParameterError("interval range space needs at least 2 samples");
    if (dim < 1) throw ParameterError("box range space needs dimension >= 1");
    RangeSpace rs;
    rs.manifold_ = dim == 1 ? RangeManifold::interval : RangeManifold::box;
    rs.scheme_ = PartitionScheme::hat;
    rs.dim_ = dim;
    rs.per_axis_ = m;
    rs.kernel_ = RangeKernel{KernelKind::gaussian, sigma, 1.0};
    rs.kernel_.validate();

    std::size_t count = 1;
    for (std::size_t a = 0; a < dim; ++a) count *= m;
    rs.sample_count_ = count;
    rs.samples_.resize(count * dim);
    rs.quadrature_.assign(count, 1.0);
    const double h = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t rest = i;
        for (std::size_t a = 0; a < dim; ++a) {
            const std::size_t k = rest % m;
            rest /= m;
            rs.samples_[i * dim + a] = static_cast<double>(k) / static_cast<double>(m - 1);
            rs.quadrature_[i] *= (k == 0 || k == m - 1) ? 0.5 * h : h;
        }
    }
    return rs;
}

TriangleMesh subdivided_icosahedron(int level)
{
    if (level < 0) throw ParameterError("subdivision level must be >= 0");
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                           {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1},  {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& p : v) p.normalize();
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                           {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                           {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoints;
        auto midpoint = [&](std::size_t a, std::size_t b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            midpoints.emplace(key, v.size() - 1);
            return v.size() - 1;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const Face& t : f) {
            const std::size_t ab = midpoint(t[0], t[1]);
            const std::size_t bc = midpoint(t[1], t[2]);
            const std::size_t ca = midpoint(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    return TriangleMesh(std::move(v), std::move(f));
}

std::vector<Vec3> fibonacci_sphere(std::size_t m)
{
    std::vector<Vec3> out(m);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < m; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(m);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double a = golden * static_cast<double>(i);
        out[i] = Vec3(r * std::cos(a), r * std::sin(a), z).normalized();
    }
    return out;
}

RangeSpace sphere_polyhedral_range_space(int level, double sigma)
{
    const TriangleMesh poly = subdivided_icosahedron(level);
    RangeSpace rs;
    rs.manifold_ = RangeManifold::sphere;
    rs.scheme_ = PartitionScheme::spherical_hat;
    rs.dim_ = 3;
    rs.sample_count_ = poly.vertex_count();
    rs.kernel_ = RangeKernel{KernelKind::von_mises_fisher, sigma, 1.0};
    rs.kernel_.validate();
    rs.samples_.reserve(rs.sample_count_ * 3);
    for (const Vec3& p : poly.positions()) rs.samples_.insert(rs.samples_.end(), {p.x(), p.y(), p.z()});
    rs.polyhedron_faces_ = poly.faces();
    rs.face_inverse_.reserve(poly.face_count());
    for (const Face& t : poly.faces()) {
        Eigen::Matrix3d m;
        m.col(0) = poly.positions()[t[0]];
        m.col(1) = poly.positions()[t[1]];
        m.col(2) = poly.positions()[t[2]];
        rs.face_inverse_.push_back(m.inverse());
    }
    rs.compute_sphere_quadrature();
    return rs;
}

RangeSpace sphere_vmf_range_space_from_samples(std::vector<Vec3> samples, double sigma)
{
    if (samples.size() < 4) throw ParameterError("sphere range space needs at least 4 samples");
    RangeSpace rs;
    rs.manifold_ = RangeManifold::sphere;
    rs.scheme_ = PartitionScheme::vmf_meshless;
    rs.dim_ = 3;
    rs.sample_count_ = samples.size();
    rs.kernel_ = RangeKernel{KernelKind::von_mises_fisher, sigma, 1.0};
    rs.kernel_.validate();
    for (Vec3& p : samples) {
        if (std::abs(p.norm() - 1.0) > 1e-6) throw ValidationError("sphere samples must be unit vectors");
        p.normalize();
        rs.samples_.insert(rs.samples_.end(), {p.x(), p.y(), p.z()});
    }

    // Bump width: half the mean nearest-neighbor geodesic distance, used as the
    // standard deviation of exp((p.q - 1) / s^2) ~ exp(-theta^2 / (2 s^2)).
    double mean_nearest = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double best = -1.0;
        for (std::size_t j = 0; j < samples.size(); ++j) {
            if (j != i) best = std::max(best, samples[i].dot(samples[j]));
        }
        mean_nearest += std::acos(std::clamp(best, -1.0, 1.0));
    }
    mean_nearest /= static_cast<double>(samples.size());
    const double width = 0.5 * mean_nearest;
    rs.bump_sigma_ = width * width;
    rs.compute_sphere_quadrature();
    return rs;
}

RangeSpace sphere_vmf_range_space(std::size_t m, double sigma, SphereSampling sampling)
{
    if (m < 4) throw ParameterError("sphere range space needs at least 4 samples");
    if (sampling == SphereSampling::tetrahedron) {
        if (m != 4) throw ParameterError("tetrahedral sampling has exactly 4 samples");
        const double s = 1.0 / std::sqrt(3.0);
        return sphere_vmf_range_space_from_samples(
            {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)}, sigma);
    }
    return sphere_vmf_range_space_from_samples(fibonacci_sphere(m), sigma);
}

double reconstruct(const RangeSpace& space, std::span<const double> sampled, std::span<const double> p)
{
    if (sampled.size() != space.sample_count()) throw ShapeError("reconstruct: one value per sample required");
    std::vector<double> q(p.begin(), p.end());
    space.project(q);
    std::vector<PartitionEntry> entries;
    space.partition(q, entries);
    double sum = 0.0;
    for (const auto& e : entries) sum += e.weight * sampled[e.sample];
    return sum;
}

double reconstruction_mse(const RangeSpace& space, double target_sigma, std::size_t trials, std::uint64_t seed)
{
    if (trials < 1) throw ParameterError("reconstruction_mse needs at least one trial");
    if (!(target_sigma > 0.0)) throw ParameterError("target width must be > 0");
    PortableRandom rng(seed);
    const bool constant = std::isinf(target_sigma);
    const KernelKind kind =
        space.manifold() == RangeManifold::sphere ? KernelKind::von_mises_fisher : KernelKind::gaussian;
    const RangeKernel target{kind, constant ? 1.0 : target_sigma, 1.0};
    const std::size_t dim = space.dimension();

    auto draw = [&](std::vector<double>& x) {
        if (space.manifold() == RangeManifold::sphere) {
            const Vec3 u = rng.unit_vector();
            x = {u.x(), u.y(), u.z()};
        } else {
            for (std::size_t a = 0; a < dim; ++a) x[a] = rng.uniform01();
        }
    };
    auto g = [&](std::span<const double> x, std::span<const double> center) {
        return constant ? 1.0 : target(x, center);
    };

    std::vector<double> center(dim), p(dim);
    std::vector<PartitionEntry> entries;
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        draw(center);
        draw(p);
        space.project(p);
        space.partition(p, entries);
        double approx = 0.0;
        for (const auto& e : entries) approx += e.weight * g(space.sample(e.sample), center);
        const double err = g(p, center) - approx;
        sum += err * err;
    }
    return sum / static_cast<double>(trials);
}

} // namespace genshift
