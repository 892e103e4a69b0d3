#ifndef MAGLAB_BOUNDS_HPP
#define MAGLAB_BOUNDS_HPP

#include <map>
#include <string>

#include "maglab/hamiltonian.hpp"

namespace maglab {

// Brute-force table of commutator norms alpha_{comm,q} and bookkeeping.
// alpha[q] is a grid maximum, i.e. a certified lower bound of the sup.
struct CommutatorReport {
  std::vector<int> q_range;
  std::map<int, double> alpha;
  int time_samples = 0;
  std::map<int, long> trees_enumerated;
  double t0 = 0.0, t1 = 0.0;
};

struct ErrorBudget {
  double local_truncation = 0.0;
  double global_truncation = 0.0;
  double local_quadrature = 0.0;
  double global_quadrature = 0.0;
  double constant_C = 1.0;
};

struct ResourcePlan {
  int p = 1;
  long L = 1;
  long M = 1;
  double delta = 0.0;
  double hamT_queries = 0.0;
  double ancilla_qubits = 0.0;
  double two_qubit_gates = 0.0;
  double subnorm_Cgamma = 1.0;
  // constants used, embedded in serialized output
  double C1 = 1.0, C3 = 1.0, gamma = 0.5, alpha = 0.0, bar_alpha = 0.0,
         normAprime = 0.0, T = 0.0, eps = 0.0;
};

// Max over all Catalan(q-1) bracketing trees and all q-tuples of grid times
// of ||nested commutator of H snapshots||. 2 <= q <= 6.
double alpha_comm(const HamiltonianModel& model, const TimeInterval& interval,
                  int q, int time_samples);
double alpha_comm_ref(const HamiltonianModel& model, const TimeInterval& interval,
                      int q, int time_samples);

CommutatorReport commutator_report(const HamiltonianModel& model,
                                   const TimeInterval& interval, int q_cap,
                                   int time_samples);

// max over the capped range q in [min(p+1,cap), min(p^2+2p,cap)] of
// alpha[q]^{1/q}. Throws when a needed q is missing from the report.
double bar_alpha_comm(const CommutatorReport& report, int p, int q_cap = 6);

// (1/(p+1)) a_{p+1} h^{p+1} + C sum_{q=p+2}^{p^2+2p} a_q h^q, where a_q
// beyond the report range is replaced by bar_alpha^q.
double local_truncation_bound(int p, double h, const CommutatorReport& report,
                              double C);

// (1/(p+1)) a_{p+1} h^p T + C sum a_q h^{q-1} T
double global_truncation_bound(int p, double h, double T,
                               const CommutatorReport& report, double C);

// 2 (tilde_alpha h)^{p+1}; requires tilde_alpha*h < 1.
double alt_bound_infinite(int p, double h, double tilde_alpha);

// (1/M)(k t^{k+1} ||A'|| ||A||^{k-1} + (k-1) t^k ||A||^k)
double quadrature_bound(int k, double t, int M, double normA, double normAprime);
// sum over k = 1..p
double quadrature_bound_sum(int p, double t, int M, double normA, double normAprime);

// L = ceil(C1^{1/p} bar_alpha^{1+1/p} T^{1+1/p} / eps^{1/p}), at least 1.
long select_steps(int p, double T, double eps, double bar_alpha, double C1 = 1.0);
double select_steps_real(int p, double T, double eps, double bar_alpha,
                         double C1 = 1.0);

// M = ceil(C3 ||A'|| bar_alpha^{-2} (L/(bar_alpha T))^{p-1}), at least p.
long select_quadrature(int p, double T, double eps, double bar_alpha,
                       double normAprime, double C3 = 1.0, double C1 = 1.0);

ResourcePlan resource_estimate(int p, double T, double eps, double alpha,
                               double bar_alpha, double normAprime, double gamma,
                               double C1 = 1.0, double C3 = 1.0);

std::pair<int, ResourcePlan> optimal_order(double T, double eps, double alpha,
                                           double bar_alpha, double normAprime,
                                           double gamma, int p_max,
                                           double C1 = 1.0, double C3 = 1.0);

std::string commutator_report_to_json(const CommutatorReport& r, int p,
                                      int q_cap);
std::string resource_plan_to_json(const ResourcePlan& plan);

}  // namespace maglab

#endif
