#pragma once

#include "genshift/signal.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace genshift {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::size_t, 3>;

/// Undirected mesh edge with the faces that contain it.
struct MeshEdge {
    std::size_t v0 = 0;  ///< smaller vertex index
    std::size_t v1 = 0;  ///< larger vertex index
    std::vector<std::size_t> faces;
};

/// Indexed triangle surface.
///
/// Construction validates indices and rejects degenerate faces (area at or
/// below 1e-12 times the squared mean edge length), then caches areas,
/// centroids, unit normals, barycentric dual vertex areas and adjacency.
/// Instances are immutable.
class TriangleMesh {
public:
    TriangleMesh() = default;
    TriangleMesh(std::vector<Vec3> positions, std::vector<Face> faces);

    std::size_t vertex_count() const { return positions_.size(); }
    std::size_t face_count() const { return faces_.size(); }

    const std::vector<Vec3>& positions() const { return positions_; }
    const std::vector<Face>& faces() const { return faces_; }

    std::span<const double> face_areas() const { return face_areas_; }
    const std::vector<Vec3>& face_centroids() const { return centroids_; }
    const std::vector<Vec3>& face_normals() const { return normals_; }
    std::span<const double> dual_areas() const { return dual_areas_; }
    double mean_edge_length() const { return mean_edge_length_; }

    const std::vector<MeshEdge>& edges() const { return edges_; }
    const std::vector<std::vector<std::size_t>>& vertex_faces() const { return vertex_faces_; }
    /// Faces sharing an edge with each face, ascending.
    const std::vector<std::vector<std::size_t>>& face_neighbors() const { return face_neighbors_; }

    /// Same connectivity, new positions (revalidated).
    TriangleMesh with_positions(std::vector<Vec3> positions) const;

private:
    std::vector<Vec3> positions_;
    std::vector<Face> faces_;
    std::vector<double> face_areas_;
    std::vector<Vec3> centroids_;
    std::vector<Vec3> normals_;
    std::vector<double> dual_areas_;
    double mean_edge_length_ = 0.0;
    std::vector<MeshEdge> edges_;
    std::vector<std::vector<std::size_t>> vertex_faces_;
    std::vector<std::vector<std::size_t>> face_neighbors_;
};

/// A w-by-h pixel lattice. Pixel (x, y) has element index y * w + x.
struct GridDomain {
    std::size_t width = 0;
    std::size_t height = 0;

    GridDomain() = default;
    GridDomain(std::size_t w, std::size_t h);

    std::size_t size() const { return width * height; }
};

/// Points with unit normals.
class OrientedPointCloud {
public:
    OrientedPointCloud() = default;
    /// Throws ValidationError on length mismatch or normals off unit length by more than 1e-9.
    OrientedPointCloud(std::vector<Vec3> points, std::vector<Vec3> normals);

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<Vec3>& normals() const { return normals_; }

    Signal normal_signal() const;
    OrientedPointCloud with_normals(std::vector<Vec3> normals) const;

private:
    std::vector<Vec3> points_;
    std::vector<Vec3> normals_;
};

Signal face_normals(const TriangleMesh& mesh);
Signal face_areas(const TriangleMesh& mesh);
Signal face_centroids(const TriangleMesh& mesh);
double mean_edge_length(const TriangleMesh& mesh);
Signal vertex_positions(const TriangleMesh& mesh);

/// Area-weighted average of incident face normals, renormalized.
Signal vertex_normals(const TriangleMesh& mesh);

/// Moves a per-face vector signal to vertices by area-weighted averaging of
/// incident faces. With `renormalize` each result is scaled to unit length.
Signal face_to_vertex(const TriangleMesh& mesh, const Signal& face_signal, bool renormalize);

/// Converts a vector of 3D points to a 3-channel signal and back.
Signal to_signal(DomainKind kind, std::span<const Vec3> vectors);
std::vector<Vec3> to_vectors(const Signal& signal);

} // namespace genshift
