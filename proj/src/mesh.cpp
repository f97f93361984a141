#include "genshift/mesh.hpp"

#include "genshift/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace genshift {

TriangleMesh::TriangleMesh(std::vector<Vec3> positions, std::vector<Face> faces)
    : positions_(std::move(positions)), faces_(std::move(faces))
{
    const std::size_t nv = positions_.size();
    const std::size_t nf = faces_.size();
    if (nf == 0) throw ValidationError("mesh has no faces");
    for (std::size_t v = 0; v < nv; ++v) {
        if (!positions_[v].allFinite()) throw ValidationError("vertex " + std::to_string(v) + " is not finite");
    }

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
    vertex_faces_.assign(nv, {});
    for (std::size_t f = 0; f < nf; ++f) {
        const Face& face = faces_[f];
        for (std::size_t k = 0; k < 3; ++k) {
            if (face[k] >= nv) {
                throw ValidationError("face " + std::to_string(f) + " references vertex " + std::to_string(face[k]) +
                                      " but the mesh has " + std::to_string(nv) + " vertices");
            }
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            throw ValidationError("degenerate face " + std::to_string(f) + ": repeated vertex index");
        }
        for (std::size_t k = 0; k < 3; ++k) {
            vertex_faces_[face[k]].push_back(f);
            const std::size_t a = std::min(face[k], face[(k + 1) % 3]);
            const std::size_t b = std::max(face[k], face[(k + 1) % 3]);
            auto [it, inserted] = edge_index.try_emplace({a, b}, edges_.size());
            if (inserted) edges_.push_back(MeshEdge{a, b, {}});
            edges_[it->second].faces.push_back(f);
        }
    }

    double length_sum = 0.0;
    for (const MeshEdge& e : edges_) length_sum += (positions_[e.v1] - positions_[e.v0]).norm();
    mean_edge_length_ = length_sum / static_cast<double>(edges_.size());

    const double area_floor = 1e-12 * mean_edge_length_ * mean_edge_length_;
    face_areas_.resize(nf);
    centroids_.resize(nf);
    normals_.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const Vec3& a = positions_[faces_[f][0]];
        const Vec3& b = positions_[faces_[f][1]];
        const Vec3& c = positions_[faces_[f][2]];
        const Vec3 cross = (b - a).cross(c - a);
        const double double_area = cross.norm();
        face_areas_[f] = 0.5 * double_area;
        if (!(face_areas_[f] > area_floor)) {
            throw ValidationError("degenerate face " + std::to_string(f) + ": area " + std::to_string(face_areas_[f]));
        }
        centroids_[f] = (a + b + c) / 3.0;
        normals_[f] = cross / double_area;
    }

    dual_areas_.assign(nv, 0.0);
    for (std::size_t v = 0; v < nv; ++v) {
        if (vertex_faces_[v].empty()) {
            throw ValidationError("vertex " + std::to_string(v) + " is not referenced by any face");
        }
        for (std::size_t f : vertex_faces_[v]) dual_areas_[v] += face_areas_[f];
        dual_areas_[v] /= 3.0;
    }

    face_neighbors_.assign(nf, {});
    for (const MeshEdge& e : edges_) {
        for (std::size_t i = 0; i < e.faces.size(); ++i) {
            for (std::size_t j = 0; j < e.faces.size(); ++j) {
                if (i != j) face_neighbors_[e.faces[i]].push_back(e.faces[j]);
            }
        }
    }
    for (auto& list : face_neighbors_) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

TriangleMesh TriangleMesh::with_positions(std::vector<Vec3> positions) const
{
    if (positions.size() != positions_.size()) throw ShapeError("with_positions: vertex count changed");
    return TriangleMesh(std::move(positions), faces_);
}

GridDomain::GridDomain(std::size_t w, std::size_t h) : width(w), height(h)
{
    if (w < 1 || h < 1) throw ValidationError("grid dimensions must be at least 1x1");
}

OrientedPointCloud::OrientedPointCloud(std::vector<Vec3> points, std::vector<Vec3> normals)
    : points_(std::move(points)), normals_(std::move(normals))
{
    if (points_.size() != normals_.size()) {
        throw ValidationError("point cloud has " + std::to_string(points_.size()) + " points but " +
                              std::to_string(normals_.size()) + " normals");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!points_[i].allFinite() || !normals_[i].allFinite()) {
            throw ValidationError("point " + std::to_string(i) + " is not finite");
        }
        if (std::abs(normals_[i].norm() - 1.0) > 1e-9) {
            throw ValidationError("normal " + std::to_string(i) + " is not unit length");
        }
    }
}

Signal OrientedPointCloud::normal_signal() const { return to_signal(DomainKind::point, normals_); }

OrientedPointCloud OrientedPointCloud::with_normals(std::vector<Vec3> normals) const
{
    return OrientedPointCloud(points_, std::move(normals));
}

Signal to_signal(DomainKind kind, std::span<const Vec3> vectors)
{
    Signal s(kind, vectors.size(), 3);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (int c = 0; c < 3; ++c) s.at(i, c) = vectors[i][c];
    }
    return s;
}

std::vector<Vec3> to_vectors(const Signal& signal)
{
    if (signal.channels() != 3) throw ShapeError("expected a 3-channel signal");
    std::vector<Vec3> out(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) out[i] = {signal.at(i, 0), signal.at(i, 1), signal.at(i, 2)};
    return out;
}

Signal face_normals(const TriangleMesh& mesh) { return to_signal(DomainKind::face, mesh.face_normals()); }

Signal face_areas(const TriangleMesh& mesh)
{
    const auto areas = mesh.face_areas();
    return Signal(DomainKind::face, areas.size(), 1, std::vector<double>(areas.begin(), areas.end()));
}

Signal face_centroids(const TriangleMesh& mesh) { return to_signal(DomainKind::face, mesh.face_centroids()); }

double mean_edge_length(const TriangleMesh& mesh) { return mesh.mean_edge_length(); }

Signal vertex_positions(const TriangleMesh& mesh) { return to_signal(DomainKind::vertex, mesh.positions()); }

Signal face_to_vertex(const TriangleMesh& mesh, const Signal& face_signal, bool renormalize)
{
    if (face_signal.size() != mesh.face_count()) throw ShapeError("face_to_vertex: signal is not per-face");
    const std::size_t n = face_signal.channels();
    Signal out(DomainKind::vertex, mesh.vertex_count(), n);
    const auto areas = mesh.face_areas();
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        auto dst = out[v];
        for (std::size_t f : mesh.vertex_faces()[v]) {
            auto src = face_signal[f];
            for (std::size_t c = 0; c < n; ++c) dst[c] += areas[f] * src[c];
        }
        double norm = 0.0;
        for (double x : dst) norm += x * x;
        norm = std::sqrt(norm);
        if (renormalize) {
            if (norm > 0.0) {
                for (double& x : dst) x /= norm;
            }
        } else {
            for (double& x : dst) x /= 3.0 * mesh.dual_areas()[v];
        }
    }
    return out;
}

Signal vertex_normals(const TriangleMesh& mesh) { return face_to_vertex(mesh, face_normals(mesh), true); }

} // namespace genshift
