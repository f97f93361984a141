#include "fixtures.hpp"

#include "genshift/random.hpp"
#include "genshift/range_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace fixtures {

namespace {

// Appends a triangle, flipping it if its normal disagrees with `outward`.
void add_oriented(std::vector<Face>& faces, const std::vector<Vec3>& pos, Face f, const Vec3& outward)
{
    const Vec3 n = (pos[f[1]] - pos[f[0]]).cross(pos[f[2]] - pos[f[0]]);
    if (n.dot(outward) < 0) std::swap(f[1], f[2]);
    faces.push_back(f);
}

double gaussian_draw(genshift::PortableRandom& rng)
{
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 tilt(const Vec3& n, double max_angle, genshift::PortableRandom& rng)
{
    Vec3 axis = n.cross(rng.unit_vector());
    while (axis.norm() < 1e-6) axis = n.cross(rng.unit_vector());
    const double angle = rng.uniform(0.0, max_angle);
    return (Eigen::AngleAxisd(angle, axis.normalized()) * n).normalized();
}

} // namespace

TriangleMesh icosphere(int level, double radius)
{
    const TriangleMesh unit = genshift::subdivided_icosahedron(level);
    std::vector<Vec3> pos = unit.positions();
    for (Vec3& p : pos) p *= radius;
    return TriangleMesh(std::move(pos), unit.faces());
}

TriangleMesh uv_sphere(std::size_t rings, std::size_t segments, double radius)
{
    std::vector<Vec3> pos;
    pos.emplace_back(0, 0, radius);
    for (std::size_t r = 0; r < rings; ++r) {
        const double theta = std::numbers::pi * static_cast<double>(r + 1) / static_cast<double>(rings + 1);
        for (std::size_t s = 0; s < segments; ++s) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(segments);
            pos.emplace_back(radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
                             radius * std::cos(theta));
        }
    }
    pos.emplace_back(0, 0, -radius);
    const std::size_t south = pos.size() - 1;
    auto ring = [&](std::size_t r, std::size_t s) { return 1 + r * segments + s % segments; };

    std::vector<Face> faces;
    auto add = [&](Face f) {
        const Vec3 c = (pos[f[0]] + pos[f[1]] + pos[f[2]]) / 3.0;
        add_oriented(faces, pos, f, c);
    };
    for (std::size_t s = 0; s < segments; ++s) {
        add({0, ring(0, s), ring(0, s + 1)});
        add({south, ring(rings - 1, s), ring(rings - 1, s + 1)});
    }
    for (std::size_t r = 0; r + 1 < rings; ++r) {
        for (std::size_t s = 0; s < segments; ++s) {
            add({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
            add({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
        }
    }
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh cube(std::size_t n)
{
    std::map<std::array<std::size_t, 3>, std::size_t> index;
    std::vector<Vec3> pos;
    auto vertex = [&](std::array<std::size_t, 3> key) {
        const auto [it, inserted] = index.try_emplace(key, pos.size());
        if (inserted) {
            pos.emplace_back(static_cast<double>(key[0]) / static_cast<double>(n),
                             static_cast<double>(key[1]) / static_cast<double>(n),
                             static_cast<double>(key[2]) / static_cast<double>(n));
        }
        return it->second;
    };

    std::vector<Face> faces;
    for (int axis = 0; axis < 3; ++axis) {
        for (std::size_t side : {std::size_t{0}, n}) {
            const int u_axis = (axis + 1) % 3;
            const int v_axis = (axis + 2) % 3;
            Vec3 outward = Vec3::Zero();
            outward[axis] = side == 0 ? -1.0 : 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    auto at = [&](std::size_t a, std::size_t b) {
                        std::array<std::size_t, 3> key{};
                        key[axis] = side;
                        key[u_axis] = a;
                        key[v_axis] = b;
                        return vertex(key);
                    };
                    const std::size_t q00 = at(i, j), q10 = at(i + 1, j), q11 = at(i + 1, j + 1), q01 = at(i, j + 1);
                    add_oriented(faces, pos, {q00, q10, q11}, outward);
                    add_oriented(faces, pos, {q00, q11, q01}, outward);
                }
            }
        }
    }
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh cylinder(double radius, double height, std::size_t rings, std::size_t segments)
{
    std::vector<Vec3> pos;
    for (std::size_t r = 0; r < rings; ++r) {
        const double z = height * static_cast<double>(r) / static_cast<double>(rings - 1);
        for (std::size_t s = 0; s < segments; ++s) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(segments);
            pos.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
        }
    }
    auto at = [&](std::size_t r, std::size_t s) { return r * segments + s % segments; };
    std::vector<Face> faces;
    for (std::size_t r = 0; r + 1 < rings; ++r) {
        for (std::size_t s = 0; s < segments; ++s) {
            const Face a{at(r, s), at(r, s + 1), at(r + 1, s + 1)};
            const Face b{at(r, s), at(r + 1, s + 1), at(r + 1, s)};
            for (const Face& f : {a, b}) {
                Vec3 c = (pos[f[0]] + pos[f[1]] + pos[f[2]]) / 3.0;
                c.z() = 0.0;
                add_oriented(faces, pos, f, c);
            }
        }
    }
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh flat_grid(std::size_t n, double size)
{
    std::vector<Vec3> pos;
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            pos.emplace_back(size * static_cast<double>(i) / static_cast<double>(n),
                             size * static_cast<double>(j) / static_cast<double>(n), 0.0);
        }
    }
    auto at = [&](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    std::vector<Face> faces;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh equilateral_grid(std::size_t rows, std::size_t cols)
{
    std::vector<Vec3> pos;
    const double h = std::sqrt(3.0) / 2.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            pos.emplace_back(static_cast<double>(c) + (r % 2 ? 0.5 : 0.0), h * static_cast<double>(r), 0.0);
        }
    }
    auto at = [&](std::size_t r, std::size_t c) { return r * cols + c; };
    std::vector<Face> faces;
    const Vec3 up(0, 0, 1);
    for (std::size_t r = 0; r + 1 < rows; ++r) {
        for (std::size_t c = 0; c + 1 < cols; ++c) {
            if (r % 2 == 0) {
                add_oriented(faces, pos, {at(r, c), at(r, c + 1), at(r + 1, c)}, up);
                add_oriented(faces, pos, {at(r, c + 1), at(r + 1, c + 1), at(r + 1, c)}, up);
            } else {
                add_oriented(faces, pos, {at(r, c), at(r + 1, c + 1), at(r + 1, c)}, up);
                add_oriented(faces, pos, {at(r, c), at(r, c + 1), at(r + 1, c + 1)}, up);
            }
        }
    }
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh wedge(std::size_t half, std::size_t rows, double slope)
{
    const std::size_t cols = 2 * half + 1;
    std::vector<Vec3> pos;
    for (std::size_t r = 0; r <= rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(cols - 1);
            const double y = 2.0 * static_cast<double>(r) / static_cast<double>(rows);
            pos.emplace_back(x, y, slope * (1.0 - std::abs(x)));
        }
    }
    auto at = [&](std::size_t r, std::size_t c) { return r * cols + c; };
    std::vector<Face> faces;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c + 1 < cols; ++c) {
            const Vec3 up(c < half ? -slope : slope, 0.0, 1.0);
            add_oriented(faces, pos, {at(r, c), at(r, c + 1), at(r + 1, c + 1)}, up);
            add_oriented(faces, pos, {at(r, c), at(r + 1, c + 1), at(r + 1, c)}, up);
        }
    }
    return TriangleMesh(std::move(pos), std::move(faces));
}

std::vector<Vec3> cube_true_normals(const TriangleMesh& cube_mesh)
{
    std::vector<Vec3> out;
    for (const Vec3& n : cube_mesh.face_normals()) {
        Eigen::Index axis = 0;
        n.cwiseAbs().maxCoeff(&axis);
        Vec3 t = Vec3::Zero();
        t[axis] = n[axis] > 0 ? 1.0 : -1.0;
        out.push_back(t);
    }
    return out;
}

Signal perturb_normals(const Signal& normals, double max_angle, std::uint64_t seed)
{
    genshift::PortableRandom rng(seed);
    std::vector<Vec3> v = genshift::to_vectors(normals);
    for (Vec3& n : v) n = tilt(n, max_angle, rng);
    return genshift::to_signal(normals.kind(), v);
}

Signal synthetic_image(const GridDomain& grid, std::uint64_t seed)
{
    genshift::PortableRandom rng(seed);
    Signal img(genshift::DomainKind::pixel, grid.size(), 1);
    const double cx = 0.55 * static_cast<double>(grid.width);
    const double cy = 0.45 * static_cast<double>(grid.height);
    const double radius = 0.3 * static_cast<double>(std::min(grid.width, grid.height));
    for (std::size_t y = 0; y < grid.height; ++y) {
        for (std::size_t x = 0; x < grid.width; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            double v = std::hypot(dx, dy) < radius ? 0.7 : 0.25;
            if (x < grid.width / 4) v = 0.5;
            v += 0.15 * static_cast<double>(y) / static_cast<double>(grid.height);
            v += rng.uniform(-0.03, 0.03);
            img.at(y * grid.width + x, 0) = std::clamp(v, 0.0, 1.0);
        }
    }
    return img;
}

OrientedPointCloud two_sheet_cloud(std::size_t per_side, double gap, double noise, std::uint64_t seed)
{
    genshift::PortableRandom rng(seed);
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    for (int sheet = 0; sheet < 2; ++sheet) {
        const Vec3 n(0.0, 0.0, sheet == 0 ? -1.0 : 1.0);
        for (std::size_t j = 0; j < per_side; ++j) {
            for (std::size_t i = 0; i < per_side; ++i) {
                points.emplace_back(static_cast<double>(i), static_cast<double>(j), sheet == 0 ? 0.0 : gap);
                normals.push_back(tilt(n, noise, rng));
            }
        }
    }
    return OrientedPointCloud(std::move(points), std::move(normals));
}

OrientedPointCloud noisy_sphere_cloud(std::size_t count, double noise, std::uint64_t seed)
{
    genshift::PortableRandom rng(seed);
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    for (const Vec3& p : genshift::fibonacci_sphere(count)) {
        points.push_back(p);
        normals.push_back(tilt(p, noise, rng));
    }
    return OrientedPointCloud(std::move(points), std::move(normals));
}

Signal bimodal_signal(const TriangleMesh& mesh, double noise, std::uint64_t seed)
{
    genshift::PortableRandom rng(seed);
    Signal s(genshift::DomainKind::vertex, mesh.vertex_count(), 1);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        s.at(v, 0) = (mesh.positions()[v].z() < 0 ? 0.2 : 0.8) + noise * gaussian_draw(rng);
    }
    return s;
}

Eigen::Matrix3d test_rotation(double angle)
{
    return Eigen::AngleAxisd(angle, Vec3(0.3, -0.5, 0.8).normalized()).toRotationMatrix();
}

TriangleMesh transform(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation, const Vec3& shift, double scale)
{
    std::vector<Vec3> pos;
    pos.reserve(mesh.vertex_count());
    for (const Vec3& p : mesh.positions()) pos.push_back(scale * (rotation * p) + shift);
    return TriangleMesh(std::move(pos), mesh.faces());
}

double max_angle(const std::vector<Vec3>& a, const std::vector<Vec3>& b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::atan2(a[i].cross(b[i]).norm(), a[i].dot(b[i])));
    }
    return worst;
}

} // namespace fixtures
