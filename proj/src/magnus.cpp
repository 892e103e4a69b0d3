#include "maglab/magnus.hpp"

#include <cmath>
#include <stdexcept>

namespace maglab {

namespace {

void check_k(int k, int kmax, const char* who) {
  if (k < 1) throw std::invalid_argument(std::string(who) + ": k must be >= 1");
  if (k > kmax)
    throw std::invalid_argument(std::string(who) + ": k > " + std::to_string(kmax) +
                                " rejected");
}

void check_M(int M, const char* who) {
  if (M < 1) throw std::invalid_argument(std::string(who) + ": M must be >= 1");
}

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

std::vector<ComplexMatrix> a_snapshots(const HamiltonianModel& model, double t0,
                                       double span, int M) {
  const double delta = span / M;
  std::vector<ComplexMatrix> a(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) a[static_cast<std::size_t>(i)] = a_eval(model, t0 + i * delta);
  return a;
}

namespace {

// Prefix/suffix regrouping of the simplex sum. Every product term is linear
// in the largest and smallest indices, so those collapse into suffix and
// prefix sums of the A snapshots; the sum stays term-for-term identical to
// the enumerated one.
ComplexMatrix quad_k1(const std::vector<ComplexMatrix>& a, int d) {
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (const auto& m : a) acc += m;
  return acc;
}

ComplexMatrix quad_k2(const std::vector<ComplexMatrix>& a, int d,
                      DescentConvention conv) {
  const int M = static_cast<int>(a.size());
  const double c12 = to_double(coeff_product({1, 2}, 2, conv));
  const double c21 = to_double(coeff_product({2, 1}, 2, conv));
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  ComplexMatrix suffix = ComplexMatrix::Zero(d, d);  // sum of a[i], i > j
  for (int j = M - 2; j >= 0; --j) {
    suffix += a[static_cast<std::size_t>(j + 1)];
    const auto& aj = a[static_cast<std::size_t>(j)];
    acc += c12 * (suffix * aj) + c21 * (aj * suffix);
  }
  return acc;
}

ComplexMatrix quad_k3(const std::vector<ComplexMatrix>& a, int d,
                      DescentConvention conv) {
  const int M = static_cast<int>(a.size());
  const double c123 = to_double(coeff_product({1, 2, 3}, 3, conv));
  const double c132 = to_double(coeff_product({1, 3, 2}, 3, conv));
  const double c213 = to_double(coeff_product({2, 1, 3}, 3, conv));
  const double c231 = to_double(coeff_product({2, 3, 1}, 3, conv));
  const double c312 = to_double(coeff_product({3, 1, 2}, 3, conv));
  const double c321 = to_double(coeff_product({3, 2, 1}, 3, conv));
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  // j is the middle index; prefix collects rank 3, suffix collects rank 1.
  std::vector<ComplexMatrix> suffix(a.size(), ComplexMatrix::Zero(d, d));
  for (int j = M - 2; j >= 0; --j)
    suffix[static_cast<std::size_t>(j)] =
        suffix[static_cast<std::size_t>(j + 1)] + a[static_cast<std::size_t>(j + 1)];
  ComplexMatrix prefix = ComplexMatrix::Zero(d, d);
  for (int j = 1; j + 1 < M; ++j) {
    prefix += a[static_cast<std::size_t>(j - 1)];
    const auto& aj = a[static_cast<std::size_t>(j)];
    const auto& rj = suffix[static_cast<std::size_t>(j)];
    const ComplexMatrix u = aj * prefix;
    const ComplexMatrix g = prefix * aj;
    acc += c123 * (rj * u) + c213 * (aj * (rj * prefix)) + c312 * (prefix * (rj * aj)) +
           c321 * (g * rj) + c132 * (rj * g) + c231 * (u * rj);
  }
  return acc;
}

ComplexMatrix quad_k4(const std::vector<ComplexMatrix>& a, int d,
                      DescentConvention conv) {
  const int M = static_cast<int>(a.size());
  const auto perms = permutations_of(4);
  std::vector<double> coef(perms.size());
  for (std::size_t q = 0; q < perms.size(); ++q)
    coef[q] = to_double(coeff_product(perms[q], 4, conv));

  std::vector<ComplexMatrix> suffix(a.size(), ComplexMatrix::Zero(d, d));
  for (int j = M - 2; j >= 0; --j)
    suffix[static_cast<std::size_t>(j)] =
        suffix[static_cast<std::size_t>(j + 1)] + a[static_cast<std::size_t>(j + 1)];

  // Middle pair (b > c); rank 1 -> suffix of b, rank 4 -> prefix of c.
  std::vector<ComplexMatrix> partial(static_cast<std::size_t>(M),
                                     ComplexMatrix::Zero(d, d));
#pragma omp parallel for schedule(dynamic)
  for (int b = 2; b < M - 1; ++b) {
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    const auto& rb = suffix[static_cast<std::size_t>(b)];
    ComplexMatrix prefix = ComplexMatrix::Zero(d, d);
    for (int c = 1; c < b; ++c) {
      prefix += a[static_cast<std::size_t>(c - 1)];
      const ComplexMatrix* slot[5] = {nullptr, &rb, &a[static_cast<std::size_t>(b)],
                                      &a[static_cast<std::size_t>(c)], &prefix};
      for (std::size_t q = 0; q < perms.size(); ++q) {
        const auto& pi = perms[q];
        ComplexMatrix prod = *slot[pi[0]];
        for (int l2 = 1; l2 < 4; ++l2) prod = prod * (*slot[pi[static_cast<std::size_t>(l2)]]);
        acc += coef[q] * prod;
      }
    }
    partial[static_cast<std::size_t>(b)] = acc;
  }
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (int b = 0; b < M; ++b) acc += partial[static_cast<std::size_t>(b)];
  return acc;
}

ComplexMatrix quad_enumerated(const std::vector<ComplexMatrix>& a, int d, int k,
                              DescentConvention conv, bool parallel) {
  const int M = static_cast<int>(a.size());
  const auto perms = permutations_of(k);
  std::vector<double> coef(perms.size());
  for (std::size_t q = 0; q < perms.size(); ++q)
    coef[q] = to_double(coeff_product(perms[q], k, conv));

  std::vector<ComplexMatrix> partial(static_cast<std::size_t>(M),
                                     ComplexMatrix::Zero(d, d));
  // Lead index i_1; each lead accumulates into its own slot so the final
  // reduction order is fixed regardless of scheduling.
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int lead = k - 1; lead < M; ++lead) {
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    std::vector<int> t(static_cast<std::size_t>(k));
    t[0] = lead;
    std::function<void(int, int)> rec = [&](int depth, int lo) {
      for (int v = k - 1 - depth; v <= lo; ++v) {
        t[static_cast<std::size_t>(depth)] = v;
        if (depth + 1 == k) {
          for (std::size_t q = 0; q < perms.size(); ++q) {
            const auto& pi = perms[q];
            ComplexMatrix prod = a[static_cast<std::size_t>(t[static_cast<std::size_t>(pi[0] - 1)])];
            for (int l = 1; l < k; ++l)
              prod = prod * a[static_cast<std::size_t>(t[static_cast<std::size_t>(pi[static_cast<std::size_t>(l)] - 1)])];
            acc += coef[q] * prod;
          }
        } else {
          rec(depth + 1, v - 1);
        }
      }
    };
    if (k == 1) {
      acc = a[static_cast<std::size_t>(lead)];
    } else {
      rec(1, lead - 1);
    }
    partial[static_cast<std::size_t>(lead)] = acc;
  }
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (int lead = 0; lead < M; ++lead) acc += partial[static_cast<std::size_t>(lead)];
  return acc;
}

}  // namespace

ComplexMatrix omega_k_quadrature(const HamiltonianModel& model,
                                 const TimeInterval& interval, int k, int M,
                                 DescentConvention conv) {
  check_k(k, 6, "omega_k_quadrature");
  check_M(M, "omega_k_quadrature");
  const int d = model.dim();
  if (k > M) return ComplexMatrix::Zero(d, d);
  const double h = interval.span();
  const auto a = a_snapshots(model, interval.t0, h, M);
  ComplexMatrix acc;
  switch (k) {
    case 1:
      acc = quad_k1(a, d);
      break;
    case 2:
      acc = quad_k2(a, d, conv);
      break;
    case 3:
      acc = quad_k3(a, d, conv);
      break;
    case 4:
      acc = quad_k4(a, d, conv);
      break;
    default:
      acc = quad_enumerated(a, d, k, conv, true);
      break;
  }
  return acc * pow_int(h / M, k);
}

ComplexMatrix omega_k_quadrature_ref(const HamiltonianModel& model,
                                     const TimeInterval& interval, int k, int M,
                                     DescentConvention conv) {
  check_k(k, 6, "omega_k_quadrature_ref");
  check_M(M, "omega_k_quadrature_ref");
  const int d = model.dim();
  if (k > M) return ComplexMatrix::Zero(d, d);
  const double h = interval.span();
  const auto a = a_snapshots(model, interval.t0, h, M);
  return quad_enumerated(a, d, k, conv, false) * pow_int(h / M, k);
}

namespace {

ComplexMatrix comm_form(const std::vector<ComplexMatrix>& a, int d, int k,
                        DescentConvention conv, bool parallel) {
  const int M = static_cast<int>(a.size());
  const auto perms = permutations_of(k);
  std::vector<double> coef(perms.size());
  for (std::size_t q = 0; q < perms.size(); ++q)
    coef[q] = to_double(coeff_commutator(perms[q], k, conv));

  std::vector<ComplexMatrix> partial(static_cast<std::size_t>(M),
                                     ComplexMatrix::Zero(d, d));
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int lead = k - 1; lead < M; ++lead) {
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    std::vector<int> t(static_cast<std::size_t>(k));
    t[0] = lead;
    std::function<void(int, int)> rec = [&](int depth, int lo) {
      for (int v = k - 1 - depth; v <= lo; ++v) {
        t[static_cast<std::size_t>(depth)] = v;
        if (depth + 1 == k) {
          for (std::size_t q = 0; q < perms.size(); ++q) {
            const auto& pi = perms[q];
            // right-comb nesting [A_{pi(1)}, [A_{pi(2)}, [..., A_{pi(k)}]]]
            ComplexMatrix b = a[static_cast<std::size_t>(t[static_cast<std::size_t>(pi[static_cast<std::size_t>(k - 1)] - 1)])];
            for (int l = k - 2; l >= 0; --l) {
              const auto& x = a[static_cast<std::size_t>(t[static_cast<std::size_t>(pi[static_cast<std::size_t>(l)] - 1)])];
              b = x * b - b * x;
            }
            acc += coef[q] * b;
          }
        } else {
          rec(depth + 1, v - 1);
        }
      }
    };
    if (k == 1) {
      acc = a[static_cast<std::size_t>(lead)];
    } else {
      rec(1, lead - 1);
    }
    partial[static_cast<std::size_t>(lead)] = acc;
  }
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (int lead = 0; lead < M; ++lead) acc += partial[static_cast<std::size_t>(lead)];
  return acc;
}

}  // namespace

ComplexMatrix omega_k_commutator_form(const HamiltonianModel& model,
                                      const TimeInterval& interval, int k, int M,
                                      DescentConvention conv) {
  check_k(k, 6, "omega_k_commutator_form");
  check_M(M, "omega_k_commutator_form");
  const int d = model.dim();
  if (k > M) return ComplexMatrix::Zero(d, d);
  const double h = interval.span();
  const auto a = a_snapshots(model, interval.t0, h, M);
  return comm_form(a, d, k, conv, true) * pow_int(h / M, k);
}

ComplexMatrix omega_k_commutator_form_ref(const HamiltonianModel& model,
                                          const TimeInterval& interval, int k, int M,
                                          DescentConvention conv) {
  check_k(k, 6, "omega_k_commutator_form_ref");
  check_M(M, "omega_k_commutator_form_ref");
  const int d = model.dim();
  if (k > M) return ComplexMatrix::Zero(d, d);
  const double h = interval.span();
  const auto a = a_snapshots(model, interval.t0, h, M);
  return comm_form(a, d, k, conv, false) * pow_int(h / M, k);
}

namespace {

void compositions(int total, int parts, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& visit) {
  if (parts == 1) {
    if (total >= 1) {
      cur.push_back(total);
      visit(cur);
      cur.pop_back();
    }
    return;
  }
  for (int first = 1; first <= total - (parts - 1); ++first) {
    cur.push_back(first);
    compositions(total - first, parts - 1, cur, visit);
    cur.pop_back();
  }
}

}  // namespace

ComplexMatrix omega_k_recursive(const HamiltonianModel& model,
                                const TimeInterval& interval, int k, int M_outer) {
  check_k(k, 5, "omega_k_recursive");
  check_M(M_outer, "omega_k_recursive");
  const int d = model.dim();
  const double h = interval.span();
  const double delta = h / M_outer;

  // Left-Riemann march; Om[n] holds Omega_n(t0, s_i) at the current grid
  // point, built from the Bernoulli recursion
  //   dOmega_n = sum_j (B_j/j!) sum_{k_1+..+k_j=n-1} ad_{Om_{k_1}}..ad_{Om_{k_j}}(A).
  std::vector<ComplexMatrix> om(static_cast<std::size_t>(k + 1),
                                ComplexMatrix::Zero(d, d));
  std::vector<double> bern_over_fact(static_cast<std::size_t>(k), 0.0);
  for (int j = 1; j < k; ++j)
    bern_over_fact[static_cast<std::size_t>(j)] =
        to_double(bernoulli(j) / Rational(factorial_big(j)));

  std::vector<ComplexMatrix> dom(static_cast<std::size_t>(k + 1),
                                 ComplexMatrix::Zero(d, d));
  for (int i = 0; i < M_outer; ++i) {
    const ComplexMatrix ai = a_eval(model, interval.t0 + i * delta);
    dom[1] = ai;
    for (int n = 2; n <= k; ++n) {
      ComplexMatrix sum = ComplexMatrix::Zero(d, d);
      for (int j = 1; j <= n - 1; ++j) {
        ComplexMatrix sj = ComplexMatrix::Zero(d, d);
        std::vector<int> cur;
        compositions(n - 1, j, cur, [&](const std::vector<int>& ks) {
          ComplexMatrix b = ai;
          for (int idx = j - 1; idx >= 0; --idx) {
            const auto& w = om[static_cast<std::size_t>(ks[static_cast<std::size_t>(idx)])];
            b = w * b - b * w;
          }
          sj += b;
        });
        sum += bern_over_fact[static_cast<std::size_t>(j)] * sj;
      }
      dom[static_cast<std::size_t>(n)] = sum;
    }
    for (int n = 1; n <= k; ++n) om[static_cast<std::size_t>(n)] += delta * dom[static_cast<std::size_t>(n)];
  }
  return om[static_cast<std::size_t>(k)];
}

ComplexMatrix omega_p_sum(const HamiltonianModel& model, const TimeInterval& interval,
                          int p, int M, DescentConvention conv) {
  if (p < 1 || p > 6)
    throw std::invalid_argument("omega_p_sum: p must be in 1..6");
  ComplexMatrix acc = ComplexMatrix::Zero(model.dim(), model.dim());
  for (int k = 1; k <= p; ++k) acc += omega_k_quadrature(model, interval, k, M, conv);
  return acc;
}

ComplexMatrix step(const HamiltonianModel& model, double t0, double h, int p, int M,
                   DescentConvention conv) {
  return expm(omega_p_sum(model, TimeInterval(t0, t0 + h), p, M, conv));
}

ComplexMatrix evolve_interval(const HamiltonianModel& model, double t0, double t1,
                              int L, int p, int M, DescentConvention conv) {
  if (L < 1) throw std::invalid_argument("evolve: L must be >= 1");
  const double h = (t1 - t0) / L;
  std::vector<ComplexMatrix> slices(static_cast<std::size_t>(L));
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < L; ++j)
    slices[static_cast<std::size_t>(j)] = step(model, t0 + j * h, h, p, M, conv);
  ComplexMatrix u = ComplexMatrix::Identity(model.dim(), model.dim());
  for (int j = 0; j < L; ++j) u = slices[static_cast<std::size_t>(j)] * u;
  return u;
}

ComplexMatrix evolve(const HamiltonianModel& model, double T, int L, int p, int M,
                     DescentConvention conv) {
  return evolve_interval(model, 0.0, T, L, p, M, conv);
}

}  // namespace maglab
