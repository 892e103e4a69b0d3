#include "maglab/bounds.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "maglab/combinatorics.hpp"
#include "maglab/matrix.hpp"

namespace maglab {

namespace {

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double alpha_comm_impl(const HamiltonianModel& model, const TimeInterval& interval,
                       int q, int samples, bool parallel) {
  if (q < 2 || q > 6)
    throw std::invalid_argument("alpha_comm: q must be in 2..6 (combinatorial guard)");
  if (samples < 2) throw std::invalid_argument("alpha_comm: time_samples must be >= 2");

  const double stepw = interval.span() / (samples - 1);
  std::vector<ComplexMatrix> h(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i)
    h[static_cast<std::size_t>(i)] = ham_eval(model, interval.t0 + i * stepw);

  const auto trees = enumerate_comm_trees(q);
  // max over (leading time digit); max is order independent so the reduction
  // is bitwise deterministic under any schedule.
  std::vector<double> best(static_cast<std::size_t>(samples), 0.0);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int lead = 0; lead < samples; ++lead) {
    double mx = 0.0;
    std::vector<ComplexMatrix> leaves(static_cast<std::size_t>(q));
    leaves[0] = h[static_cast<std::size_t>(lead)];
    std::vector<int> digit(static_cast<std::size_t>(q), 0);
    while (true) {
      for (int i = 1; i < q; ++i)
        leaves[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(digit[static_cast<std::size_t>(i)])];
      for (const auto& tree : trees)
        mx = std::max(mx, spectral_norm(nested_commutator(*tree, leaves)));
      int pos = q - 1;
      while (pos >= 1 && digit[static_cast<std::size_t>(pos)] == samples - 1) {
        digit[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 1) break;
      ++digit[static_cast<std::size_t>(pos)];
    }
    best[static_cast<std::size_t>(lead)] = mx;
  }
  double mx = 0.0;
  for (double v : best) mx = std::max(mx, v);
  return mx;
}

}  // namespace

double alpha_comm(const HamiltonianModel& model, const TimeInterval& interval, int q,
                  int time_samples) {
  return alpha_comm_impl(model, interval, q, time_samples, true);
}

double alpha_comm_ref(const HamiltonianModel& model, const TimeInterval& interval,
                      int q, int time_samples) {
  return alpha_comm_impl(model, interval, q, time_samples, false);
}

CommutatorReport commutator_report(const HamiltonianModel& model,
                                   const TimeInterval& interval, int q_cap,
                                   int time_samples) {
  if (q_cap < 2 || q_cap > 6)
    throw std::invalid_argument("commutator_report: q_cap must be in 2..6");
  CommutatorReport r;
  r.time_samples = time_samples;
  r.t0 = interval.t0;
  r.t1 = interval.t1;
  for (int q = 2; q <= q_cap; ++q) {
    r.q_range.push_back(q);
    r.alpha[q] = alpha_comm(model, interval, q, time_samples);
    r.trees_enumerated[q] = catalan_big(q - 1).convert_to<long>();
  }
  return r;
}

double bar_alpha_comm(const CommutatorReport& report, int p, int q_cap) {
  if (p < 1) throw std::invalid_argument("bar_alpha_comm: p must be >= 1");
  const int lo = std::min(p + 1, q_cap);
  const int hi = std::min(p * p + 2 * p, q_cap);
  double mx = 0.0;
  for (int q = lo; q <= hi; ++q) {
    auto it = report.alpha.find(q);
    if (it == report.alpha.end())
      throw std::invalid_argument("bar_alpha_comm: report missing q=" +
                                  std::to_string(q));
    mx = std::max(mx, std::pow(it->second, 1.0 / q));
  }
  return mx;
}

namespace {

double alpha_q_or_bar(const CommutatorReport& report, double bar, int q) {
  auto it = report.alpha.find(q);
  if (it != report.alpha.end()) return it->second;
  return pow_int(bar, q);
}

}  // namespace

double local_truncation_bound(int p, double h, const CommutatorReport& report,
                              double C) {
  if (!(h > 0)) throw std::invalid_argument("local_truncation_bound: h must be > 0");
  const int cap = report.q_range.empty() ? 0 : report.q_range.back();
  const double bar = bar_alpha_comm(report, p, cap);
  double b = alpha_q_or_bar(report, bar, p + 1) * pow_int(h, p + 1) / (p + 1);
  for (int q = p + 2; q <= p * p + 2 * p; ++q)
    b += C * alpha_q_or_bar(report, bar, q) * pow_int(h, q);
  return b;
}

double global_truncation_bound(int p, double h, double T,
                               const CommutatorReport& report, double C) {
  if (!(h > 0)) throw std::invalid_argument("global_truncation_bound: h must be > 0");
  const int cap = report.q_range.empty() ? 0 : report.q_range.back();
  const double bar = bar_alpha_comm(report, p, cap);
  double b = alpha_q_or_bar(report, bar, p + 1) * pow_int(h, p) * T / (p + 1);
  for (int q = p + 2; q <= p * p + 2 * p; ++q)
    b += C * alpha_q_or_bar(report, bar, q) * pow_int(h, q - 1) * T;
  return b;
}

double alt_bound_infinite(int p, double h, double tilde_alpha) {
  if (!(tilde_alpha * h < 1.0))
    throw std::domain_error("alt_bound_infinite: tilde_alpha*h >= 1 is out of regime");
  return 2.0 * pow_int(tilde_alpha * h, p + 1);
}

double quadrature_bound(int k, double t, int M, double normA, double normAprime) {
  if (M < 1) throw std::invalid_argument("quadrature_bound: M must be >= 1");
  return (k * pow_int(t, k + 1) * normAprime * pow_int(normA, k - 1) +
          (k - 1) * pow_int(t, k) * pow_int(normA, k)) /
         M;
}

double quadrature_bound_sum(int p, double t, int M, double normA,
                            double normAprime) {
  double b = 0.0;
  for (int k = 1; k <= p; ++k) b += quadrature_bound(k, t, M, normA, normAprime);
  return b;
}

double select_steps_real(int p, double T, double eps, double bar_alpha, double C1) {
  if (!(eps > 0)) throw std::invalid_argument("select_steps: eps must be > 0");
  if (bar_alpha <= 0.0) return 1.0;
  return std::pow(C1, 1.0 / p) * std::pow(bar_alpha, 1.0 + 1.0 / p) *
         std::pow(T, 1.0 + 1.0 / p) / std::pow(eps, 1.0 / p);
}

long select_steps(int p, double T, double eps, double bar_alpha, double C1) {
  const double raw = select_steps_real(p, T, eps, bar_alpha, C1);
  return std::max(1L, static_cast<long>(std::ceil(raw - 1e-12)));
}

long select_quadrature(int p, double T, double eps, double bar_alpha,
                       double normAprime, double C3, double C1) {
  if (!(eps > 0)) throw std::invalid_argument("select_quadrature: eps must be > 0");
  if (normAprime <= 0.0 || bar_alpha <= 0.0) return p;
  const double L = select_steps_real(p, T, eps, bar_alpha, C1);
  const double raw =
      C3 * normAprime / (bar_alpha * bar_alpha) * std::pow(L / (bar_alpha * T), p - 1);
  return std::max(static_cast<long>(p),
                  static_cast<long>(std::ceil(raw - 1e-12)));
}

ResourcePlan resource_estimate(int p, double T, double eps, double alpha,
                               double bar_alpha, double normAprime, double gamma,
                               double C1, double C3) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::domain_error("resource_estimate: infeasible gamma (need 0 < gamma < 1)");
  if (p < 1) throw std::invalid_argument("resource_estimate: p must be >= 1");

  ResourcePlan plan;
  plan.p = p;
  plan.C1 = C1;
  plan.C3 = C3;
  plan.gamma = gamma;
  plan.alpha = alpha;
  plan.bar_alpha = bar_alpha;
  plan.normAprime = normAprime;
  plan.T = T;
  plan.eps = eps;

  long L = select_steps(p, T, eps, bar_alpha, C1);
  // enforce alpha*h <= gamma by raising L
  if (alpha > 0.0) {
    const long Lmin = static_cast<long>(std::ceil(alpha * T / gamma - 1e-12));
    L = std::max(L, std::max(1L, Lmin));
  }
  plan.L = L;
  plan.M = select_quadrature(p, T, eps, bar_alpha, normAprime, C3, C1);

  const double h = T / static_cast<double>(L);
  const double ah = alpha * h;
  double cg = 0.0;
  for (int i = 0; i < p; ++i) cg += pow_int(ah, i);
  plan.subnorm_Cgamma = cg;

  double delta = 0.5;
  if (bar_alpha * T > 0.0)
    delta = std::min(0.5, std::pow(C1 * eps / (bar_alpha * T), 1.0 + 1.0 / p));
  plan.delta = delta;

  const double logInvDelta = std::log(1.0 / delta);
  plan.hamT_queries = static_cast<double>(L) * p * p * (cg * ah + logInvDelta);
  const double log2p = std::log2(static_cast<double>(p));
  const double log2M = std::log2(static_cast<double>(plan.M));
  plan.ancilla_qubits =
      p * p * std::log2(p * static_cast<double>(L) / eps) + p * 1.0 + p * log2M;
  plan.two_qubit_gates = static_cast<double>(L) *
                         (p * p * p * log2p + p * log2p * log2M) *
                         (cg * ah + logInvDelta);
  return plan;
}

std::pair<int, ResourcePlan> optimal_order(double T, double eps, double alpha,
                                           double bar_alpha, double normAprime,
                                           double gamma, int p_max, double C1,
                                           double C3) {
  if (p_max < 1 || p_max > 16)
    throw std::invalid_argument("optimal_order: p_max must be in 1..16");
  int best_p = 1;
  ResourcePlan best;
  for (int p = 1; p <= p_max; ++p) {
    ResourcePlan plan =
        resource_estimate(p, T, eps, alpha, bar_alpha, normAprime, gamma, C1, C3);
    if (p == 1 || plan.hamT_queries < best.hamT_queries) {
      best = plan;
      best_p = p;
    }
  }
  return {best_p, best};
}

std::string commutator_report_to_json(const CommutatorReport& r, int p, int q_cap) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["t0"] = r.t0;
  j["t1"] = r.t1;
  j["time_samples"] = r.time_samples;
  j["q_range"] = r.q_range;
  for (const auto& [q, v] : r.alpha) j["alpha"][std::to_string(q)] = v;
  for (const auto& [q, n] : r.trees_enumerated)
    j["trees_enumerated"][std::to_string(q)] = n;
  j["p"] = p;
  j["q_cap"] = q_cap;
  j["bar_alpha_range"] = {std::min(p + 1, q_cap), std::min(p * p + 2 * p, q_cap)};
  j["bar_alpha_comm"] = bar_alpha_comm(r, p, q_cap);
  return j.dump(2);
}

std::string resource_plan_to_json(const ResourcePlan& plan) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["p"] = plan.p;
  j["L"] = plan.L;
  j["M"] = plan.M;
  j["delta"] = plan.delta;
  j["hamT_queries"] = plan.hamT_queries;
  j["ancilla_qubits"] = plan.ancilla_qubits;
  j["two_qubit_gates"] = plan.two_qubit_gates;
  j["subnorm_Cgamma"] = plan.subnorm_Cgamma;
  j["constants"] = {{"C1", plan.C1},         {"C3", plan.C3},
                    {"gamma", plan.gamma},   {"alpha", plan.alpha},
                    {"bar_alpha", plan.bar_alpha}, {"normAprime", plan.normAprime},
                    {"T", plan.T},           {"eps", plan.eps},
                    {"log_base", "e"}};
  return j.dump(2);
}

}  // namespace maglab
