#ifndef MAGLAB_MAGNUS_HPP
#define MAGLAB_MAGNUS_HPP

#include "maglab/combinatorics.hpp"
#include "maglab/hamiltonian.hpp"

namespace maglab {

enum class MagnusRepresentation { Recursive, Product, Commutator };

struct MagnusConfig {
  int p = 2;                       // expansion order, <= 6
  int M = 32;                      // quadrature points per integral layer
  MagnusRepresentation representation = MagnusRepresentation::Product;
  DescentConvention convention = DescentConvention::Paper;
};

// A(t0 + i*delta) for i = 0..M-1 with delta = span/M; the shared left-endpoint
// grid of every quadrature routine and of the block-encoding circuits.
std::vector<ComplexMatrix> a_snapshots(const HamiltonianModel& model, double t0,
                                       double span, int M);

// Discretized k-th Magnus term over the strictly decreasing index simplex,
// product representation:
//   sum_{i_1>...>i_k} sum_pi C_{pi,k} prod_l A(t0 + i_{pi(l)} h/M) (h/M)^k.
// k > M gives the zero matrix (empty sum); k > 6 rejected.
ComplexMatrix omega_k_quadrature(const HamiltonianModel& model,
                                 const TimeInterval& interval, int k, int M,
                                 DescentConvention conv = DescentConvention::Paper);

// Serial reference implementation: plain tuple x permutation enumeration.
ComplexMatrix omega_k_quadrature_ref(const HamiltonianModel& model,
                                     const TimeInterval& interval, int k, int M,
                                     DescentConvention conv = DescentConvention::Paper);

// Same grid and index set, right-nested commutator representation with
// coefficients c_{pi,k}.
ComplexMatrix omega_k_commutator_form(const HamiltonianModel& model,
                                      const TimeInterval& interval, int k, int M,
                                      DescentConvention conv = DescentConvention::Paper);

ComplexMatrix omega_k_commutator_form_ref(
    const HamiltonianModel& model, const TimeInterval& interval, int k, int M,
    DescentConvention conv = DescentConvention::Paper);

// Bernoulli-recursion evaluation of Omega_k, all integrals left-Riemann on a
// shared M_outer grid; converges to omega_k_quadrature as M_outer -> inf.
// k <= 5 (recursion depth cost).
ComplexMatrix omega_k_recursive(const HamiltonianModel& model,
                                const TimeInterval& interval, int k, int M_outer);

// sum_{k=1..p} omega_k_quadrature
ComplexMatrix omega_p_sum(const HamiltonianModel& model,
                          const TimeInterval& interval, int p, int M,
                          DescentConvention conv = DescentConvention::Paper);

// expm of the truncated discretized expansion over [t0, t0+h].
ComplexMatrix step(const HamiltonianModel& model, double t0, double h, int p,
                   int M, DescentConvention conv = DescentConvention::Paper);

// Ordered product of `step` over L uniform slices of [t0, t1]; later slices
// multiply on the left.
ComplexMatrix evolve_interval(const HamiltonianModel& model, double t0, double t1,
                              int L, int p, int M,
                              DescentConvention conv = DescentConvention::Paper);

ComplexMatrix evolve(const HamiltonianModel& model, double T, int L, int p, int M,
                     DescentConvention conv = DescentConvention::Paper);

}  // namespace maglab

#endif
