#pragma once

#include <string>

#include "proxcomp/atoms.hpp"
#include "proxcomp/expr.hpp"

namespace proxcomp::dcp {

Curvature curvature_of(const Expr& e);
Sign sign_of(const Expr& e);

// True when `c` is CONSTANT, AFFINE or CONVEX (resp. CONCAVE).
bool is_convex(Curvature c);
bool is_concave(Curvature c);

struct Verdict {
  bool accepted = true;
  std::string reason;
  std::string path;  // e.g. "objective/add[1]/norm1" for the first violation
};

Verdict verify(const Problem& p);

}  // namespace proxcomp::dcp
