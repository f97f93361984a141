#include "genshift/curvature.hpp"

#include "genshift/errors.hpp"

namespace genshift {

Signal mean_curvature_normal(const TriangleMesh& mesh, const SparseOperator& laplacian, const MassMatrix& mass)
{
    if (laplacian.size() != mesh.vertex_count() || mass.size() != mesh.vertex_count()) {
        throw ShapeError("mean curvature: operators do not match the mesh");
    }
    const Signal x = vertex_positions(mesh);
    RowMatrix d = laplacian.matrix * x.matrix();
    for (Eigen::Index v = 0; v < d.rows(); ++v) d.row(v) /= mass.diagonal[v];
    return Signal::from_matrix(DomainKind::vertex, d);
}

Signal mean_curvature(const TriangleMesh& mesh, const SparseOperator& laplacian, const MassMatrix& mass)
{
    const Signal d = mean_curvature_normal(mesh, laplacian, mass);
    const Signal n = vertex_normals(mesh);
    Signal h(DomainKind::vertex, mesh.vertex_count(), 1);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        const Eigen::Vector3d dv(d.at(v, 0), d.at(v, 1), d.at(v, 2));
        const Eigen::Vector3d nv(n.at(v, 0), n.at(v, 1), n.at(v, 2));
        const double magnitude = 0.5 * dv.norm();
        h.at(v, 0) = nv.dot(dv) < 0.0 ? -magnitude : magnitude;
    }
    return h;
}

} // namespace genshift
