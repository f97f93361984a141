#pragma once

#include "genshift/filters.hpp"
#include "genshift/mesh.hpp"
#include "genshift/range_space.hpp"
#include "genshift/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace genshift {

enum class FilterMode { bilateral, mean_shift };

/// Settings for normal-field filtering on meshes and point clouds.
struct DenoiseConfig {
    double sigma_spatial = 2.0;        ///< multiples of the mean edge length
    double sigma_range = 0.1;          ///< VMF width
    int subdivision_level = 1;         ///< icosahedron level for spherical hats
    PartitionScheme scheme = PartitionScheme::spherical_hat;
    std::size_t meshless_samples = 42; ///< sample count for vmf_meshless
    FilterMode mode = FilterMode::mean_shift;
    int max_iterations = 50;
    double tolerance = 1.7453292519943295e-4;  ///< radians (0.01 degree)
    int reconstruction_iterations = 20;
    std::size_t threads = 0;

    void validate() const;
    RangeSpace range_space() const;
};

/// Adds independent uniform noise in [-a l, a l] to every coordinate, l the
/// mean edge length.
TriangleMesh add_vertex_noise(const TriangleMesh& mesh, double amplitude, std::uint64_t seed);

struct NormalFilterResult {
    Signal normals;
    int iterations = 0;  ///< 1 for a bilateral pass
    bool converged = true;
    std::size_t fallback_count = 0;
};

/// Filters the unit face normals with the face dual Laplacian heat step.
NormalFilterResult denoise_normals(const TriangleMesh& mesh, const DenoiseConfig& cfg);

/// Moves vertices so face normals follow `target_normals`:
///   x_v += 1/|F_v| sum_{f in F_v} n_f (n_f . (c_f - x_v))
/// applied to all vertices at once, `iterations` times.
TriangleMesh reconstruct_vertices(const TriangleMesh& mesh, const Signal& target_normals, int iterations);

/// Root mean squared vertex-to-vertex distance; requires identical connectivity.
double vertex_rmse(const TriangleMesh& a, const TriangleMesh& b);

struct DenoiseResult {
    TriangleMesh mesh;
    NormalFilterResult normals;
};

DenoiseResult denoise_mesh(const TriangleMesh& mesh, const DenoiseConfig& cfg);

struct CloudFilterResult {
    OrientedPointCloud cloud;
    int iterations = 0;
    bool converged = true;
    std::size_t duplicate_pairs = 0;
};

/// Filters cloud normals over a kNN graph Laplacian. For clouds the spatial
/// width counts graph hops: dt = sigma_spatial^2 / 2.
CloudFilterResult filter_cloud_normals(const OrientedPointCloud& cloud, const DenoiseConfig& cfg, std::size_t k,
                                       double t);

enum class ScalarMode { blur, bilateral, mean_shift };
enum class CrossGuide { self, normals };

struct ScalarFilterConfig {
    ScalarMode mode = ScalarMode::bilateral;
    CrossGuide cross = CrossGuide::self;
    double sigma_spatial = 2.0;  ///< mean edge length multiples
    double sigma_range = 0.1;    ///< interval units after normalization, or VMF width
    std::size_t samples = 20;    ///< interval samples
    int subdivision_level = 1;   ///< sphere samples for the normal guide
    int max_iterations = 50;
    double tolerance = 1e-4;
    std::size_t threads = 0;

    void validate() const;
};

struct ScalarFilterResult {
    Signal output;
    int iterations = 0;
    bool converged = true;
    std::size_t fallback_count = 0;
    std::size_t clamped_count = 0;
};

/// Filters a per-vertex scalar signal over the cotangent heat step. With the
/// self guide the signal is mapped affinely onto [0, 1] for filtering and
/// mapped back; with the normal guide, vertex normals steer the range kernel.
ScalarFilterResult filter_mesh_scalar(const TriangleMesh& mesh, const Signal& signal, const ScalarFilterConfig& cfg);

struct EnhanceConfig {
    double gain = 1.0;
    double sigma_spatial = 2.0;
    double sigma_range = 0.3;  ///< Gaussian width on unit normals
    int subdivision_level = 1;
    std::size_t threads = 0;

    void validate() const;
};

struct EnhanceResult {
    TriangleMesh mesh;
    std::vector<double> displacement;  ///< per-vertex |x' - x|
    std::size_t fallback_count = 0;
};

/// Edge-aware curvature exaggeration: the mean curvature normal d = A^{-1} L x
/// is filtered with the unsharp spatial kernel and a Gaussian kernel on vertex
/// normals, and each vertex moves by dt (d_filtered - d).
EnhanceResult enhance_features(const TriangleMesh& mesh, const EnhanceConfig& cfg);

/// Normal histograms on faces with spherical bins.
HistogramField mesh_normal_histograms(const TriangleMesh& mesh, const DenoiseConfig& cfg);

/// Histograms of a per-vertex scalar (normalized onto [0, 1]) with interval bins.
HistogramField mesh_scalar_histograms(const TriangleMesh& mesh, const Signal& signal, double sigma_spatial,
                                      double sigma_range, std::size_t samples, std::size_t threads);

/// Per-channel affine map onto [0, 1]: original = offset + range * normalized.
/// A constant channel maps to 0.5.
struct ScalarNormalization {
    double offset = 0.0;
    double range = 1.0;
};
std::vector<ScalarNormalization> normalize_unit_interval(Signal& signal);
void denormalize(Signal& signal, const std::vector<ScalarNormalization>& maps);

} // namespace genshift
