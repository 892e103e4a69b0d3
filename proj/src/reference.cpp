#include "maglab/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace maglab {

namespace {

// Fourth-order Gauss-Magnus step: with A_1, A_2 sampled at the two Gauss
// points, Omega = (dt/2)(A_1 + A_2) - (sqrt(3) dt^2 / 12) [A_1, A_2].
// Exactly unitary for anti-Hermitian A, so the unitarity defect of the
// result isolates other bugs.
ComplexMatrix gm4_product(const HamiltonianModel& model, const TimeInterval& interval,
                          long n) {
  const double dt = interval.span() / n;
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const double w = std::sqrt(3.0) / 12.0 * dt * dt;

  ComplexMatrix u = ComplexMatrix::Identity(model.dim(), model.dim());
  const long chunk = 2048;
  std::vector<ComplexMatrix> slice(static_cast<std::size_t>(std::min(chunk, n)));
  for (long base = 0; base < n; base += chunk) {
    const long m = std::min(chunk, n - base);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i) {
      const double t = interval.t0 + (base + i) * dt;
      const ComplexMatrix a1 = a_eval(model, t + c1 * dt);
      const ComplexMatrix a2 = a_eval(model, t + c2 * dt);
      slice[static_cast<std::size_t>(i)] =
          expm(0.5 * dt * (a1 + a2) - w * (a1 * a2 - a2 * a1));
    }
    for (long i = 0; i < m; ++i) u = slice[static_cast<std::size_t>(i)] * u;
  }
  return u;
}

}  // namespace

ReferenceResult exact_propagator(const HamiltonianModel& model,
                                 const TimeInterval& interval, double tol) {
  if (tol < 1e-13) throw std::invalid_argument("exact_propagator: tol must be >= 1e-13");
  const long cap = 1L << 24;
  long n = 8;
  ComplexMatrix coarse = gm4_product(model, interval, n);
  while (true) {
    ComplexMatrix fine = gm4_product(model, interval, 2 * n);
    const double diff = spectral_norm(fine - coarse);
    if (diff < tol / 2) {
      ReferenceResult r;
      r.propagator = fine;
      r.error_estimate = diff;
      r.substeps_used = 2 * n;
      return r;
    }
    n *= 2;
    if (2 * n > cap)
      throw std::runtime_error("exact_propagator: no convergence within 2^24 substeps");
    coarse = std::move(fine);
  }
}

double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) throw std::invalid_argument("unitarity_defect: non-square");
  ComplexMatrix d = u.adjoint() * u;
  d -= ComplexMatrix::Identity(u.rows(), u.cols());
  return spectral_norm(d);
}

}  // namespace maglab
