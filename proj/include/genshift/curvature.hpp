#pragma once

#include "genshift/diffusion.hpp"
#include "genshift/mesh.hpp"
#include "genshift/signal.hpp"

namespace genshift {

/// Per-vertex A^{-1} L x, the discrete mean curvature normal scaled by two.
/// Points outward on convex regions.
Signal mean_curvature_normal(const TriangleMesh& mesh, const SparseOperator& laplacian, const MassMatrix& mass);

/// Signed mean curvature: sign(n_v . d_v) |d_v| / 2 with d = A^{-1} L x and
/// n_v the area-weighted vertex normal. A unit sphere gives +1.
Signal mean_curvature(const TriangleMesh& mesh, const SparseOperator& laplacian, const MassMatrix& mass);

} // namespace genshift
