#pragma once

#include "genshift/mesh.hpp"
#include "genshift/signal.hpp"

#include <Eigen/Geometry>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fixtures {

using genshift::Face;
using genshift::GridDomain;
using genshift::OrientedPointCloud;
using genshift::Signal;
using genshift::TriangleMesh;
using genshift::Vec3;

/// Subdivided icosahedron scaled to `radius`.
TriangleMesh icosphere(int level, double radius = 1.0);

/// Latitude/longitude sphere: two poles plus rings x segments vertices.
TriangleMesh uv_sphere(std::size_t rings, std::size_t segments, double radius = 1.0);

/// Unit cube [0,1]^3 with each side split into n x n quads, two triangles
/// each, welded and wound outward. 12 n^2 faces.
TriangleMesh cube(std::size_t n);

/// Open cylinder around the z axis (no caps).
TriangleMesh cylinder(double radius, double height, std::size_t rings, std::size_t segments);

/// n x n quads on the z = 0 plane covering [0, size]^2, split along one diagonal.
TriangleMesh flat_grid(std::size_t n, double size = 1.0);

/// Equilateral triangle lattice with `rows` x `cols` vertices and unit edges.
TriangleMesh equilateral_grid(std::size_t rows, std::size_t cols);

/// Two planar strips meeting at the crease x = 0 (a roof): z = slope * (1 - |x|).
/// Vertex columns at x = -1 .. 1 with `half` quads on each side.
TriangleMesh wedge(std::size_t half, std::size_t rows, double slope = 1.0);

/// Face directions of the unit cube fixture: for every face, the exact outward axis.
std::vector<Vec3> cube_true_normals(const TriangleMesh& cube_mesh);

/// Rotates each face normal by an angle uniform in [0, max_angle] about a random
/// axis orthogonal to it.
Signal perturb_normals(const Signal& normals, double max_angle, std::uint64_t seed);

/// Deterministic 64 x 64 style test image: two-tone regions with a gradient
/// and mild noise, values in [0, 1].
Signal synthetic_image(const GridDomain& grid, std::uint64_t seed);

/// Two horizontal sheets at z = 0 and z = gap with opposite normals, each
/// normal perturbed by up to `noise` radians.
OrientedPointCloud two_sheet_cloud(std::size_t per_side, double gap, double noise, std::uint64_t seed);

/// Random points on the unit sphere with radial normals perturbed by up to `noise` radians.
OrientedPointCloud noisy_sphere_cloud(std::size_t count, double noise, std::uint64_t seed);

/// Per-vertex scalar: 0.2 on z < 0, 0.8 on z >= 0, plus Gaussian noise of width `noise`.
Signal bimodal_signal(const TriangleMesh& mesh, double noise, std::uint64_t seed);

/// Rigid rotation about a fixed oblique axis.
Eigen::Matrix3d test_rotation(double angle = 0.7);

TriangleMesh transform(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& shift = Vec3::Zero(),
                       double scale = 1.0);

/// Max angle in radians between corresponding unit vectors.
double max_angle(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

} // namespace fixtures
