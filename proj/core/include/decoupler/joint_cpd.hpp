#pragma once

#include "decoupler/cpd.hpp"
#include "decoupler/tensor.hpp"

namespace decoupler {

/// Joint decomposition of the Jacobian tensor J = [[W, V, G']] and the
/// Hessian tensor H = [[W, V, V, G'']] with W and V shared and V
/// occupying two Hessian modes. Minimizes
///
///   alpha1 ||J - [[W,V,G']]||_F^2 + alpha2 ||H - [[W,V,V,G'']]||_F^2
///
/// all at once with analytic gradients and an L-BFGS line search, since
/// alternating updates cannot handle a factor that appears twice. Each
/// restart is initialized from an ALS decomposition (of J when its term
/// is active, of a symmetrized H otherwise) followed by linear solves
/// for the remaining factors.
///
/// Shapes: J is n x m x N and H is n x m x m x N; the single-output
/// case passes the squeezed m x N Jacobian and/or m x m x N Hessian, in
/// which case there is no W factor. A term whose weight is zero may be
/// passed as an empty tensor and is ignored.
///
/// The result factor set is tagged "W", "V", "Gp", "Gpp" (inactive
/// factors absent). converged reflects the gradient test
/// ||grad|| <= tol * (1 + cost) at the returned point.
CpdResult joint_cpd(const DenseTensor& jac, const DenseTensor& hess, const CpdConfig& cfg);

/// [[W, V, Gp]] (or [[V, Gp]] without a W factor).
DenseTensor reconstruct_jacobian_term(const FactorSet& fs);

/// [[W, V, V, Gpp]] (or [[V, V, Gpp]] without a W factor); exactly
/// symmetric in the two V modes.
DenseTensor reconstruct_hessian_term(const FactorSet& fs);

}  // namespace decoupler
