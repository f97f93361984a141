#include "genshift/pipeline.hpp"

#include "genshift/curvature.hpp"
#include "genshift/diffusion.hpp"
#include "genshift/errors.hpp"
#include "genshift/parallel.hpp"
#include "genshift/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace genshift {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) throw ParameterError(std::string(name) + " must be > 0");
}

Signal renormalized(const Signal& vectors, const Signal& fallback)
{
    Signal out = vectors;
    for (std::size_t e = 0; e < out.size(); ++e) {
        auto row = out[e];
        const double norm = std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
        if (norm > 0.0) {
            for (double& x : row) x /= norm;
        } else {
            for (std::size_t c = 0; c < 3; ++c) row[c] = fallback.at(e, c);
        }
    }
    return out;
}

NormalFilterResult filter_normals(const Signal& normals, const RangeSpace& range,
                                  std::shared_ptr<const BlurOperator> blur, const DenoiseConfig& cfg)
{
    FilterParams params;
    params.range = range;
    params.blur = std::move(blur);
    params.max_iterations = cfg.max_iterations;
    params.tolerance = cfg.tolerance;
    params.threads = cfg.threads;

    NormalFilterResult out;
    if (cfg.mode == FilterMode::bilateral) {
        BilateralResult b = generalized_bilateral(normals, normals, params);
        out.normals = renormalized(b.output, normals);
        out.iterations = 1;
        out.fallback_count = b.fallback_count;
    } else {
        MeanShiftResult m = mean_shift_spherical(normals, params);
        out.normals = std::move(m.output);
        out.iterations = m.iterations;
        out.converged = m.converged;
        out.fallback_count = m.degenerate_count;
    }
    return out;
}

} // namespace

void DenoiseConfig::validate() const
{
    require_positive(sigma_spatial, "spatial width");
    require_positive(sigma_range, "range width");
    require_positive(tolerance, "tolerance");
    if (subdivision_level < 0) throw ParameterError("subdivision level must be >= 0");
    if (max_iterations < 1) throw ParameterError("max iterations must be >= 1");
    if (reconstruction_iterations < 1) throw ParameterError("reconstruction iterations must be >= 1");
    if (scheme == PartitionScheme::hat) throw ParameterError("normal filtering needs a spherical partition");
}

RangeSpace DenoiseConfig::range_space() const
{
    if (scheme == PartitionScheme::vmf_meshless) return sphere_vmf_range_space(meshless_samples, sigma_range);
    return sphere_polyhedral_range_space(subdivision_level, sigma_range);
}

TriangleMesh add_vertex_noise(const TriangleMesh& mesh, double amplitude, std::uint64_t seed)
{
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ParameterError("noise amplitude must be >= 0");
    if (amplitude == 0.0) return mesh;
    const double half_width = amplitude * mesh.mean_edge_length();
    PortableRandom rng(seed);
    std::vector<Vec3> positions = mesh.positions();
    for (Vec3& p : positions) {
        for (int c = 0; c < 3; ++c) p[c] += rng.uniform(-half_width, half_width);
    }
    return mesh.with_positions(std::move(positions));
}

NormalFilterResult denoise_normals(const TriangleMesh& mesh, const DenoiseConfig& cfg)
{
    cfg.validate();
    const LaplacianPair lap = build_face_dual_laplacian(mesh);
    auto blur = heat_step(lap.laplacian, lap.mass, diffusion_time(cfg.sigma_spatial, mesh.mean_edge_length()));
    return filter_normals(face_normals(mesh), cfg.range_space(), blur, cfg);
}

TriangleMesh reconstruct_vertices(const TriangleMesh& mesh, const Signal& target_normals, int iterations)
{
    if (iterations < 1) throw ParameterError("reconstruction needs at least one iteration");
    if (target_normals.size() != mesh.face_count() || target_normals.channels() != 3) {
        throw ShapeError("reconstruction needs one target normal per face");
    }
    const std::vector<Vec3> normals = to_vectors(target_normals);
    const auto& faces = mesh.faces();
    const auto& incident = mesh.vertex_faces();
    std::vector<Vec3> x = mesh.positions();
    std::vector<Vec3> next(x.size());
    std::vector<Vec3> centroids(faces.size());
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t f = 0; f < faces.size(); ++f) centroids[f] = (x[faces[f][0]] + x[faces[f][1]] + x[faces[f][2]]) / 3.0;
        for (std::size_t v = 0; v < x.size(); ++v) {
            Vec3 step = Vec3::Zero();
            for (std::size_t f : incident[v]) step += normals[f] * normals[f].dot(centroids[f] - x[v]);
            next[v] = x[v] + step / static_cast<double>(incident[v].size());
        }
        std::swap(x, next);
    }
    return mesh.with_positions(std::move(x));
}

double vertex_rmse(const TriangleMesh& a, const TriangleMesh& b)
{
    if (a.vertex_count() != b.vertex_count() || a.faces() != b.faces()) {
        throw ShapeError("vertex_rmse needs meshes with identical connectivity");
    }
    double sum = 0.0;
    for (std::size_t v = 0; v < a.vertex_count(); ++v) sum += (a.positions()[v] - b.positions()[v]).squaredNorm();
    return std::sqrt(sum / static_cast<double>(a.vertex_count()));
}

DenoiseResult denoise_mesh(const TriangleMesh& mesh, const DenoiseConfig& cfg)
{
    DenoiseResult out;
    out.normals = denoise_normals(mesh, cfg);
    out.mesh = reconstruct_vertices(mesh, out.normals.normals, cfg.reconstruction_iterations);
    return out;
}

CloudFilterResult filter_cloud_normals(const OrientedPointCloud& cloud, const DenoiseConfig& cfg, std::size_t k,
                                       double t)
{
    cfg.validate();
    const KnnLaplacian lap = build_knn_graph_laplacian(cloud, k, t);
    auto blur = heat_step(lap.laplacian, lap.mass, diffusion_time(cfg.sigma_spatial, 1.0));
    NormalFilterResult filtered = filter_normals(cloud.normal_signal(), cfg.range_space(), blur, cfg);

    CloudFilterResult out;
    out.cloud = cloud.with_normals(to_vectors(filtered.normals));
    out.iterations = filtered.iterations;
    out.converged = filtered.converged;
    out.duplicate_pairs = lap.duplicate_pairs;
    return out;
}

void ScalarFilterConfig::validate() const
{
    require_positive(sigma_spatial, "spatial width");
    require_positive(sigma_range, "range width");
    require_positive(tolerance, "tolerance");
    if (samples < 2) throw ParameterError("interval range needs at least 2 samples");
    if (subdivision_level < 0) throw ParameterError("subdivision level must be >= 0");
    if (max_iterations < 1) throw ParameterError("max iterations must be >= 1");
    if (mode == ScalarMode::mean_shift && cross == CrossGuide::normals) {
        throw ParameterError("mean shift filters a signal by its own values; use --cross self");
    }
}

std::vector<ScalarNormalization> normalize_unit_interval(Signal& signal)
{
    std::vector<ScalarNormalization> maps(signal.channels());
    for (std::size_t c = 0; c < signal.channels(); ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t e = 0; e < signal.size(); ++e) {
            lo = std::min(lo, signal.at(e, c));
            hi = std::max(hi, signal.at(e, c));
        }
        if (signal.size() == 0) continue;
        if (hi > lo) {
            maps[c] = {lo, hi - lo};
            for (std::size_t e = 0; e < signal.size(); ++e) {
                signal.at(e, c) = std::clamp((signal.at(e, c) - lo) / (hi - lo), 0.0, 1.0);
            }
        } else {
            maps[c] = {lo - 0.5, 1.0};
            for (std::size_t e = 0; e < signal.size(); ++e) signal.at(e, c) = 0.5;
        }
    }
    return maps;
}

void denormalize(Signal& signal, const std::vector<ScalarNormalization>& maps)
{
    for (std::size_t c = 0; c < signal.channels(); ++c) {
        for (std::size_t e = 0; e < signal.size(); ++e) signal.at(e, c) = maps[c].offset + maps[c].range * signal.at(e, c);
    }
}

ScalarFilterResult filter_mesh_scalar(const TriangleMesh& mesh, const Signal& signal, const ScalarFilterConfig& cfg)
{
    cfg.validate();
    if (signal.size() != mesh.vertex_count()) throw ShapeError("scalar signal must have one row per vertex");
    const LaplacianPair lap = build_cotan_laplacian(mesh);
    auto blur = heat_step(lap.laplacian, lap.mass, diffusion_time(cfg.sigma_spatial, mesh.mean_edge_length()));

    ScalarFilterResult out;
    if (cfg.mode == ScalarMode::blur) {
        out.output = blur->apply(signal);
        return out;
    }

    FilterParams params;
    params.blur = blur;
    params.max_iterations = cfg.max_iterations;
    params.tolerance = cfg.tolerance;
    params.threads = cfg.threads;

    if (cfg.cross == CrossGuide::normals) {
        params.range = sphere_polyhedral_range_space(cfg.subdivision_level, cfg.sigma_range);
        BilateralResult b = generalized_bilateral(signal, vertex_normals(mesh), params);
        out.output = std::move(b.output);
        out.fallback_count = b.fallback_count;
        return out;
    }

    Signal normalized = signal;
    const auto maps = normalize_unit_interval(normalized);
    params.range = box_range_space(signal.channels(), cfg.samples, cfg.sigma_range);
    if (cfg.mode == ScalarMode::bilateral) {
        BilateralResult b = generalized_bilateral(normalized, normalized, params);
        out.output = std::move(b.output);
        out.fallback_count = b.fallback_count;
        out.clamped_count = b.clamped_count;
    } else {
        MeanShiftResult m = mean_shift_euclidean(normalized, params);
        out.output = std::move(m.output);
        out.iterations = m.iterations;
        out.converged = m.converged;
        out.fallback_count = m.degenerate_count;
        out.clamped_count = m.clamped_count;
    }
    denormalize(out.output, maps);
    return out;
}

void EnhanceConfig::validate() const
{
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw ParameterError("gain must be >= 0");
    require_positive(sigma_spatial, "spatial width");
    require_positive(sigma_range, "range width");
    if (subdivision_level < 0) throw ParameterError("subdivision level must be >= 0");
}

EnhanceResult enhance_features(const TriangleMesh& mesh, const EnhanceConfig& cfg)
{
    cfg.validate();
    const LaplacianPair lap = build_cotan_laplacian(mesh);
    const double dt = diffusion_time(cfg.sigma_spatial, mesh.mean_edge_length());
    auto blur = heat_step(lap.laplacian, lap.mass, dt);

    // exp(-|p - q|^2 / s^2) on unit vectors equals exp((p.q - 1) / (s^2 / 2)).
    FilterParams params;
    params.range = sphere_polyhedral_range_space(cfg.subdivision_level, 0.5 * cfg.sigma_range * cfg.sigma_range);
    params.blur = substitute_kernel_unsharp(blur, cfg.gain);
    params.threads = cfg.threads;

    const Signal curvature_normal = mean_curvature_normal(mesh, lap.laplacian, lap.mass);
    const BilateralResult filtered = generalized_bilateral(curvature_normal, vertex_normals(mesh), params);

    EnhanceResult out;
    out.fallback_count = filtered.fallback_count;
    std::vector<Vec3> positions = mesh.positions();
    out.displacement.resize(positions.size());
    for (std::size_t v = 0; v < positions.size(); ++v) {
        Vec3 delta;
        for (int c = 0; c < 3; ++c) delta[c] = dt * (filtered.output.at(v, c) - curvature_normal.at(v, c));
        positions[v] += delta;
        out.displacement[v] = delta.norm();
    }
    out.mesh = mesh.with_positions(std::move(positions));
    return out;
}

HistogramField mesh_normal_histograms(const TriangleMesh& mesh, const DenoiseConfig& cfg)
{
    cfg.validate();
    const LaplacianPair lap = build_face_dual_laplacian(mesh);
    FilterParams params;
    params.range = cfg.range_space();
    params.blur = heat_step(lap.laplacian, lap.mass, diffusion_time(cfg.sigma_spatial, mesh.mean_edge_length()));
    params.threads = cfg.threads;
    return local_histograms(face_normals(mesh), params);
}

HistogramField mesh_scalar_histograms(const TriangleMesh& mesh, const Signal& signal, double sigma_spatial,
                                      double sigma_range, std::size_t samples, std::size_t threads)
{
    require_positive(sigma_spatial, "spatial width");
    if (signal.size() != mesh.vertex_count() || signal.channels() != 1) {
        throw ShapeError("scalar histograms need one value per vertex");
    }
    Signal normalized = signal;
    normalize_unit_interval(normalized);
    const LaplacianPair lap = build_cotan_laplacian(mesh);
    FilterParams params;
    params.range = interval_range_space(samples, sigma_range);
    params.blur = heat_step(lap.laplacian, lap.mass, diffusion_time(sigma_spatial, mesh.mean_edge_length()));
    params.threads = threads;
    return local_histograms(normalized, params);
}

} // namespace genshift
