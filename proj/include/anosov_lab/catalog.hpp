#pragma once

#include <string>
#include <vector>

#include "anosov_lab/replin.hpp"

namespace alab {

// Holonomy of the regular 4g-gon tiling in SL(2,R), on the standard surface presentation.
Representation fuchsian_surface_sl2(int genus);
// Twist deformation b1 -> b1 a1^s of the above (a real power of the hyperbolic a1); for s != 0
// small it is Fuchsian and not conjugate to s = 0.
Representation fuchsian_twist_sl2(int genus, double s);
// Linear reflection (Vinberg) representation of the (p,q,r) triangle group with Cartan matrix
// entries A12 = -2cos(pi/p) e^t, A21 = -2cos(pi/p) e^{-t}, written in a frame where t = 0 is
// in SO(2,1) and fixes the base point (0,0,1) up to the incenter.
Representation triangle_vinberg(int p, int q, int r, double t);
// Two hyperbolic elements of SL(2,R) with disjoint axes and ping-pong domains.
Representation f2_schottky_sl2();

// Built-in names: fuchsian-g<g>[-twist(s)]-{sym2,sl2}, triangle-<pqr>-vinberg(t),
// f2-schottky (Sym^2 lifted), f2-schottky-sl2.
bool is_catalog_name(const std::string& name);
Representation catalog_representation(const std::string& name);
std::vector<std::string> catalog_names();

// SL(2,R) element g with Ad(g) = A for A in SO_0(2,1) (basis diag-form (1,1,-1) of sl2).
Matrix adjoint_preimage(const Matrix& A);

}  // namespace alab
