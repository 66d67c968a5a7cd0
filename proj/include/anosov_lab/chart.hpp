#pragma once

#include <vector>

#include "anosov_lab/replin.hpp"

namespace alab {

// Affine chart {x : <x, n> = 1} of projective space, with coordinates in an orthonormal basis of
// the complement of n.
struct AffineChart {
  Eigen::VectorXd normal;
  Eigen::MatrixXd basis;  // d x (d - 1)
  double margin = 0;      // min |<x_i, n>| over the unit points it was built from
  Eigen::VectorXd coords(const Eigen::VectorXd& x) const;
};

// Chart maximizing the margin min_i |<x_i, n>| (principal direction, then a few subgradient
// steps). variant > 0 tilts the normal by 0.15 * variant rad while keeping the chart valid.
AffineChart best_affine_chart(const std::vector<Eigen::VectorXd>& unit_points, int variant = 0);

}  // namespace alab
