#include "fixtures.hpp"

#include "genshift/diffusion.hpp"
#include "genshift/errors.hpp"
#include "genshift/random.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace genshift;

namespace {

Eigen::MatrixXd dense(const SparseOperator& op) { return Eigen::MatrixXd(op.matrix); }

RowMatrix random_column(std::size_t n, std::uint64_t seed, std::size_t channels = 1)
{
    PortableRandom rng(seed);
    RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(channels));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    return m;
}

double cot(const Vec3& a, const Vec3& b) { return a.dot(b) / a.cross(b).norm(); }

// Independent per-triangle cotangent assembly into a dense matrix.
Eigen::MatrixXd cotan_oracle(const TriangleMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const Face& f : mesh.faces()) {
        for (int k = 0; k < 3; ++k) {
            const std::size_t o = f[k], i = f[(k + 1) % 3], j = f[(k + 2) % 3];
            const double w = 0.5 * cot(mesh.positions()[i] - mesh.positions()[o], mesh.positions()[j] - mesh.positions()[o]);
            L(i, j) -= w;
            L(j, i) -= w;
            L(i, i) += w;
            L(j, j) += w;
        }
    }
    return L;
}

void check_laplacian_basics(const SparseOperator& L, const MassMatrix& A)
{
    const Eigen::MatrixXd D = dense(L);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((D * Eigen::VectorXd::Ones(D.rows())).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(A.diagonal.minCoeff() > 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TriangleMesh permuted(const TriangleMesh& mesh, const std::vector<std::size_t>& perm)
{
    std::vector<Vec3> pos(mesh.vertex_count());
    for (std::size_t i = 0; i < perm.size(); ++i) pos[perm[i]] = mesh.positions()[i];
    std::vector<Face> faces;
    for (const Face& f : mesh.faces()) faces.push_back({perm[f[0]], perm[f[1]], perm[f[2]]});
    return TriangleMesh(std::move(pos), std::move(faces));
}

} // namespace

TEST_CASE("cotan laplacian of a unit square")
{
    const TriangleMesh square({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)},
                              {Face{0, 1, 2}, Face{0, 2, 3}});
    const LaplacianPair lap = build_cotan_laplacian(square);
    const Eigen::MatrixXd L = dense(lap.laplacian);
    CHECK(std::abs(L(0, 2)) <= 1e-15);  // diagonal edge: both opposite angles are right angles
    CHECK(L(0, 1) == doctest::Approx(-0.5));
    CHECK(lap.mass.diagonal(0) == doctest::Approx(1.0 / 3.0));
    CHECK(lap.mass.diagonal(1) == doctest::Approx(1.0 / 6.0));
    check_laplacian_basics(lap.laplacian, lap.mass);
}

TEST_CASE("cotan laplacian on an equilateral lattice")
{
    const TriangleMesh grid = fixtures::equilateral_grid(6, 7);
    const LaplacianPair lap = build_cotan_laplacian(grid);
    const Eigen::MatrixXd L = dense(lap.laplacian);
    const Eigen::MatrixXd oracle = cotan_oracle(grid);
    CHECK((L - oracle).cwiseAbs().maxCoeff() <= 1e-12);
    int interior_edges = 0;
    for (const MeshEdge& e : grid.edges()) {
        if (e.faces.size() == 2) {
            CHECK(L(static_cast<Eigen::Index>(e.v0), static_cast<Eigen::Index>(e.v1)) ==
                  doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
            ++interior_edges;
        }
    }
    CHECK(interior_edges > 50);
    check_laplacian_basics(lap.laplacian, lap.mass);
}

TEST_CASE("cotan laplacian on a curved mesh matches the oracle")
{
    const TriangleMesh mesh = fixtures::uv_sphere(5, 9);
    const LaplacianPair lap = build_cotan_laplacian(mesh);
    CHECK((dense(lap.laplacian) - cotan_oracle(mesh)).cwiseAbs().maxCoeff() <= 1e-12);
    check_laplacian_basics(lap.laplacian, lap.mass);
}

TEST_CASE("face dual laplacian")
{
    SUBCASE("two triangles sharing the square diagonal") {
        const TriangleMesh square({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)},
                                  {Face{0, 1, 2}, Face{0, 2, 3}});
        const LaplacianPair lap = build_face_dual_laplacian(square);
        const Vec3 c0 = (square.positions()[0] + square.positions()[1] + square.positions()[2]) / 3.0;
        const Vec3 c1 = (square.positions()[0] + square.positions()[2] + square.positions()[3]) / 3.0;
        const double w = std::sqrt(2.0) / (c0 - c1).norm();
        const Eigen::MatrixXd L = dense(lap.laplacian);
        CHECK(L(0, 1) == doctest::Approx(-w).epsilon(1e-14));
        CHECK(L(0, 0) == doctest::Approx(w).epsilon(1e-14));
        CHECK(lap.mass.diagonal(0) == doctest::Approx(0.5));
        check_laplacian_basics(lap.laplacian, lap.mass);
    }
    SUBCASE("regular tetrahedron has equal weights") {
        const TriangleMesh tet({Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)},
                               {Face{0, 1, 2}, Face{0, 3, 1}, Face{0, 2, 3}, Face{1, 3, 2}});
        const Eigen::MatrixXd L = dense(build_face_dual_laplacian(tet).laplacian);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                if (i != j) CHECK(L(i, j) == doctest::Approx(L(0, 1)).epsilon(1e-12));
            }
        }
        CHECK(L(0, 1) < 0.0);
    }
    SUBCASE("cube") {
        const TriangleMesh c = fixtures::cube(3);
        const LaplacianPair lap = build_face_dual_laplacian(c);
        check_laplacian_basics(lap.laplacian, lap.mass);
        for (std::size_t f = 0; f < c.face_count(); ++f) {
            CHECK(lap.mass.diagonal(static_cast<Eigen::Index>(f)) == doctest::Approx(c.face_areas()[f]));
        }
    }
    SUBCASE("three faces on one edge") {
        const TriangleMesh fin({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1)},
                               {Face{0, 1, 2}, Face{0, 1, 3}, Face{0, 1, 4}});
        try {
            build_face_dual_laplacian(fin);
            FAIL("expected NonManifoldError");
        } catch (const NonManifoldError& e) {
            CHECK(e.first_vertex() == 0);
            CHECK(e.second_vertex() == 1);
        }
    }
}

TEST_CASE("grid blur")
{
    SUBCASE("constant image is preserved exactly") {
        const auto blur = build_grid_blur(GridDomain(17, 9), 2.5);
        const RowMatrix out = blur->apply(RowMatrix::Constant(17 * 9, 1, 0.37));
        CHECK((out.array() - 0.37).abs().maxCoeff() <= 1e-15);
    }
    SUBCASE("impulse response equals the normalized discrete Gaussian") {
        const GridDomain grid(33, 33);
        const auto blur = build_grid_blur(grid, 2.0);
        RowMatrix impulse = RowMatrix::Zero(33 * 33, 1);
        impulse(16 * 33 + 16, 0) = 1.0;
        const RowMatrix out = blur->apply(impulse);
        double norm = 0.0;
        for (int r = -6; r <= 6; ++r) norm += std::exp(-r * r / 8.0);
        CHECK(blur->radius() == 6);
        CHECK(out(16 * 33 + 16, 0) == doctest::Approx(1.0 / (norm * norm)).epsilon(1e-14));
        const double off = std::exp(-1.0 / 8.0) * std::exp(-4.0 / 8.0) / (norm * norm);
        CHECK(out(17 * 33 + 18, 0) == doctest::Approx(off).epsilon(1e-14));
        CHECK(out(16 * 33 + 23, 0) == 0.0);  // outside the truncation radius
    }
    SUBCASE("blur commutes with mirroring") {
        const GridDomain grid(20, 13);
        const auto blur = build_grid_blur(grid, 1.7);
        const RowMatrix v = random_column(grid.size(), 3);
        RowMatrix mirrored(v.rows(), 1);
        for (std::size_t y = 0; y < grid.height; ++y) {
            for (std::size_t x = 0; x < grid.width; ++x) {
                mirrored(static_cast<Eigen::Index>(y * grid.width + (grid.width - 1 - x)), 0) =
                    v(static_cast<Eigen::Index>(y * grid.width + x), 0);
            }
        }
        const RowMatrix a = blur->apply(v);
        const RowMatrix b = blur->apply(mirrored);
        double worst = 0.0;
        for (std::size_t y = 0; y < grid.height; ++y) {
            for (std::size_t x = 0; x < grid.width; ++x) {
                worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(y * grid.width + x), 0) -
                                                 b(static_cast<Eigen::Index>(y * grid.width + grid.width - 1 - x), 0)));
            }
        }
        CHECK(worst <= 1e-12);
    }
    SUBCASE("invalid width") {
        CHECK_THROWS_AS(build_grid_blur(GridDomain(4, 4), 0.0), ParameterError);
        CHECK_THROWS_AS(build_grid_blur(GridDomain(4, 4), -1.0), ParameterError);
    }
}

TEST_CASE("knn graph laplacian")
{
    SUBCASE("four points, every pair connected") {
        const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3(0.5, 0.5, 1)};
        const OrientedPointCloud cloud(pts, std::vector<Vec3>(4, Vec3(0, 0, 1)));
        const double t = 0.8;
        const KnnLaplacian knn = build_knn_graph_laplacian(cloud, 3, t);
        const Eigen::MatrixXd L = dense(knn.laplacian);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                if (i == j) continue;
                CHECK(-L(i, j) == doctest::Approx(std::exp(-(pts[i] - pts[j]).squaredNorm() / t)).epsilon(1e-14));
            }
        }
        CHECK(knn.mass.diagonal.isOnes());
        check_laplacian_basics(knn.laplacian, knn.mass);
    }
    SUBCASE("far clusters decouple") {
        std::vector<Vec3> pts;
        for (int c = 0; c < 2; ++c) {
            for (int i = 0; i < 10; ++i) pts.emplace_back(c * 100.0 + 0.1 * i, 0.05 * (i % 3), 0.0);
        }
        const OrientedPointCloud cloud(pts, std::vector<Vec3>(pts.size(), Vec3(0, 0, 1)));
        const Eigen::MatrixXd L = dense(build_knn_graph_laplacian(cloud, 4, 0.05).laplacian);
        CHECK(L.block(0, 10, 10, 10).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((L * Eigen::VectorXd::Ones(20)).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("duplicates get unit weight") {
        const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
        const OrientedPointCloud cloud(pts, std::vector<Vec3>(pts.size(), Vec3(0, 0, 1)));
        const KnnLaplacian knn = build_knn_graph_laplacian(cloud, 3, 0.5);
        CHECK(knn.duplicate_pairs == 1);
        CHECK(dense(knn.laplacian)(0, 1) == -1.0);
    }
    SUBCASE("preconditions") {
        const OrientedPointCloud cloud = fixtures::noisy_sphere_cloud(5, 0.0, 1);
        CHECK_THROWS_AS(build_knn_graph_laplacian(cloud, 2, 1.0), ParameterError);
        CHECK_THROWS_AS(build_knn_graph_laplacian(cloud, 3, 0.0), ParameterError);
        CHECK_THROWS_AS(build_knn_graph_laplacian(cloud, 5, 1.0), ParameterError);
    }
}

TEST_CASE("heat step")
{
    const TriangleMesh sphere = fixtures::icosphere(2);
    const LaplacianPair lap = build_cotan_laplacian(sphere);
    const double ell = sphere.mean_edge_length();
    const auto T = heat_step(lap.laplacian, lap.mass, diffusion_time(2.0, ell));
    const auto n = static_cast<Eigen::Index>(sphere.vertex_count());
    const Eigen::VectorXd& A = lap.mass.diagonal;

    SUBCASE("constants") {
        CHECK((T->apply(RowMatrix::Ones(n, 1)).array() - 1.0).abs().maxCoeff() <= 1e-8);
    }
    SUBCASE("vanishing time is the identity") {
        const auto T0 = heat_step(lap.laplacian, lap.mass, 1e-12 * ell * ell);
        const RowMatrix v = random_column(sphere.vertex_count(), 5);
        CHECK((T0->apply(v) - v).cwiseAbs().maxCoeff() <= 1e-6);
    }
    SUBCASE("impulse stays nonnegative and conserves mass") {
        RowMatrix impulse = RowMatrix::Zero(n, 1);
        impulse(7, 0) = 1.0;
        const RowMatrix out = T->apply(impulse);
        CHECK(out.minCoeff() >= -1e-9);
        const double before = A(7);
        const double after = (A.array() * out.col(0).array()).sum();
        CHECK(std::abs(after - before) <= 1e-8);
    }
    SUBCASE("linearity, channels and non-idempotence") {
        const RowMatrix u = random_column(sphere.vertex_count(), 11);
        const RowMatrix v = random_column(sphere.vertex_count(), 12);
        const RowMatrix lhs = T->apply(RowMatrix(2.0 * u - 3.0 * v));
        const RowMatrix rhs = 2.0 * T->apply(u) - 3.0 * T->apply(v);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);

        RowMatrix both(n, 2);
        both.col(0) = u.col(0);
        both.col(1) = v.col(0);
        const RowMatrix stacked = T->apply(both);
        CHECK((stacked.col(0) - T->apply(u).col(0)).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((stacked.col(1) - T->apply(v).col(0)).cwiseAbs().maxCoeff() <= 1e-14);

        const RowMatrix once = T->apply(u);
        CHECK((T->apply(once) - once).cwiseAbs().maxCoeff() > 1e-3);
    }
    SUBCASE("mean preservation and energy decrease") {
        const RowMatrix v = random_column(sphere.vertex_count(), 21);
        const RowMatrix out = T->apply(v);
        const double before = (A.array() * v.col(0).array()).sum();
        const double after = (A.array() * out.col(0).array()).sum();
        CHECK(std::abs(after - before) <= 1e-7 * std::max(1.0, std::abs(before)));
        const Eigen::VectorXd x = v.col(0);
        const Eigen::VectorXd y = out.col(0);
        CHECK(y.dot(lap.laplacian.matrix * y) <= x.dot(lap.laplacian.matrix * x) + 1e-9);
    }
    SUBCASE("signal wrapper checks shapes") {
        CHECK_THROWS_AS(T->apply(Signal(DomainKind::vertex, 3, 1)), ShapeError);
        const Signal s(DomainKind::vertex, sphere.vertex_count(), 1, 1.0);
        const Signal out = T->apply(s);
        CHECK(out.kind() == DomainKind::vertex);
    }
    SUBCASE("invalid time") {
        CHECK_THROWS_AS(heat_step(lap.laplacian, lap.mass, 0.0), ParameterError);
    }
}

TEST_CASE("heat step commutes with relabeling")
{
    const TriangleMesh mesh = fixtures::uv_sphere(6, 8);
    std::vector<std::size_t> perm(mesh.vertex_count());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 17 + 5) % perm.size();
    const TriangleMesh other = permuted(mesh, perm);

    const LaplacianPair a = build_cotan_laplacian(mesh);
    const LaplacianPair b = build_cotan_laplacian(other);
    const double dt = diffusion_time(1.5, mesh.mean_edge_length());
    const RowMatrix v = random_column(mesh.vertex_count(), 8);
    RowMatrix pv(v.rows(), 1);
    for (std::size_t i = 0; i < perm.size(); ++i) pv(static_cast<Eigen::Index>(perm[i]), 0) = v(static_cast<Eigen::Index>(i), 0);
    const RowMatrix out_a = heat_step(a.laplacian, a.mass, dt)->apply(v);
    const RowMatrix out_b = heat_step(b.laplacian, b.mass, dt)->apply(pv);
    double worst = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        worst = std::max(worst, std::abs(out_a(static_cast<Eigen::Index>(i), 0) - out_b(static_cast<Eigen::Index>(perm[i]), 0)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("constant preservation on every domain kind")
{
    const TriangleMesh c = fixtures::cube(4);
    const LaplacianPair faces = build_face_dual_laplacian(c);
    const auto Tf = heat_step(faces.laplacian, faces.mass, diffusion_time(2.0, c.mean_edge_length()));
    CHECK((Tf->apply(RowMatrix::Constant(static_cast<Eigen::Index>(c.face_count()), 1, -2.5)).array() + 2.5).abs().maxCoeff() <= 1e-8);

    const OrientedPointCloud cloud = fixtures::noisy_sphere_cloud(200, 0.1, 4);
    const KnnLaplacian knn = build_knn_graph_laplacian(cloud, 8, 0.05);
    const auto Tc = heat_step(knn.laplacian, knn.mass, 2.0);
    CHECK((Tc->apply(RowMatrix::Constant(200, 1, 0.25)).array() - 0.25).abs().maxCoeff() <= 1e-8);

    const auto Tg = build_grid_blur(GridDomain(9, 31), 4.0);
    CHECK((Tg->apply(RowMatrix::Constant(9 * 31, 1, 3.0)).array() - 3.0).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("unsharp operator")
{
    const TriangleMesh sphere = fixtures::icosphere(1);
    const LaplacianPair lap = build_cotan_laplacian(sphere);
    const auto T = heat_step(lap.laplacian, lap.mass, diffusion_time(2.0, sphere.mean_edge_length()));
    const RowMatrix v = random_column(sphere.vertex_count(), 2);

    CHECK((substitute_kernel_unsharp(T, 0.0)->apply(v) - v).cwiseAbs().maxCoeff() == 0.0);
    const auto U = substitute_kernel_unsharp(T, 1.5);
    CHECK((U->apply(v) - (2.5 * v - 1.5 * T->apply(v))).cwiseAbs().maxCoeff() <= 1e-14);
    const RowMatrix c = RowMatrix::Constant(v.rows(), 1, 0.4);
    CHECK((U->apply(c).array() - 0.4).abs().maxCoeff() <= 1e-8);
    CHECK_THROWS_AS(substitute_kernel_unsharp(T, -0.1), ParameterError);
}

TEST_CASE("dense blur matrix and time convention")
{
    CHECK(diffusion_time(2.0, 0.5) == doctest::Approx(0.5));
    const auto blur = build_grid_blur(GridDomain(5, 4), 1.0);
    const Eigen::MatrixXd M = dense_blur_matrix(*blur);
    CHECK(M.rows() == 20);
    CHECK((M * Eigen::VectorXd::Ones(20) - Eigen::VectorXd::Ones(20)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(dense_blur_matrix(*build_grid_blur(GridDomain(100, 60), 1.0)), ParameterError);
}
