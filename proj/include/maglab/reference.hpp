#ifndef MAGLAB_REFERENCE_HPP
#define MAGLAB_REFERENCE_HPP

#include "maglab/hamiltonian.hpp"

namespace maglab {

struct ReferenceResult {
  ComplexMatrix propagator;
  double error_estimate = 0.0;
  long substeps_used = 0;
};

// Trusted propagator for U = Texp(int A): step-doubled midpoint-exponential
// integrator. The base scheme is itself unitary, so the unitarity defect of
// the output isolates other bugs. Throws if 2^24 substeps do not converge.
ReferenceResult exact_propagator(const HamiltonianModel& model,
                                 const TimeInterval& interval, double tol);

// ||u^dag u - I|| (spectral norm)
double unitarity_defect(const ComplexMatrix& u);

}  // namespace maglab

#endif
