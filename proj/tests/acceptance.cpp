// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run at the tolerances pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <vector>

#include "maglab/blockenc.hpp"
#include "maglab/bounds.hpp"
#include "maglab/magnus.hpp"
#include "maglab/reference.hpp"
#include "test_util.hpp"

using namespace maglab;
using namespace maglab::testutil;
namespace be = maglab::blockenc;

namespace {

int g_failures = 0;

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s (t=%.1fs)\n", pass ? "PASS" : "FAIL", idx,
              name, detail.c_str(), now_s());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lx = std::log(h[i]);
    const double ly = std::log(std::max(e[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// --- criterion 1: order of accuracy -------------------------------------
//
// Run exactly as stated: fixed M = 512. At that fixed quadrature depth the
// first-order Riemann defect ((h/2M)||A(T)-A(0)|| globally) floors the
// measured error below the p >= 2 truncation on these models, so the stated
// slope thresholds cannot be met for p >= 2; the truncation-isolated
// diagnostic (M scaled with h) is printed alongside for the same fits.
void criterion_1() {
  const std::vector<double> hs = {0.25, 0.125, 0.0625, 0.03125};
  const int M = 512;
  bool pass = true;
  std::string detail;
  int model_idx = 0;
  for (const auto& model : {model_cos_sin2(), model_cos_sin2_2q()}) {
    ++model_idx;
    const auto t_start = now_s();
    const auto ref = exact_propagator(model, TimeInterval(0, 1.0), 1e-12);
    for (int p : {1, 2, 3}) {
      std::vector<double> ge, le, ge_iso, le_iso;
      for (double h : hs) {
        const int L = static_cast<int>(std::lround(1.0 / h));
        ge.push_back(spectral_norm(evolve(model, 1.0, L, p, M) - ref.propagator));
        const auto local_ref = exact_propagator(model, TimeInterval(0, h), 1e-12);
        le.push_back(spectral_norm(step(model, 0.0, h, p, M) - local_ref.propagator));
        const int Ms = static_cast<int>(std::lround(512.0 * (0.25 / h) * (0.25 / h)));
        ge_iso.push_back(
            spectral_norm(evolve(model, 1.0, L, p, Ms) - ref.propagator));
        le_iso.push_back(
            spectral_norm(step(model, 0.0, h, p, Ms) - local_ref.propagator));
      }
      const double gs = fit_slope(hs, ge);
      const double ls = fit_slope(hs, le);
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    " [m%d p%d: global %.2f/%.2f local %.2f/%.2f | isolated %.2f %.2f]",
                    model_idx, p, gs, p - 0.25, ls, p + 0.75, fit_slope(hs, ge_iso),
                    fit_slope(hs, le_iso));
      detail += buf;
      if (gs < p - 0.25 || ls < p + 0.75) pass = false;
    }
    const double elapsed = now_s() - t_start;
    if (elapsed > 120.0) {
      pass = false;
      detail += " [runtime over 2 min]";
    }
  }
  report(1, "order of accuracy", pass, detail);
}

// --- criterion 2: commuting limit ----------------------------------------
void criterion_2() {
  const auto t_start = now_s();
  bool pass = true;
  std::string detail;

  HamiltonianModel diag1(2, {{coeff_const(0.9), pauli('Z')}});
  HamiltonianModel diag2(4, {{coeff_const(0.7), pauli_matrix("ZZ")},
                             {coeff_const(0.3), pauli_matrix("IZ")}});
  double worst = 0.0;
  for (const auto& m : {diag1, diag2}) {
    const auto ref = exact_propagator(m, TimeInterval(0, 1.0), 1e-12);
    for (double h : {1.0, 0.5, 0.25, 0.125}) {
      const int L = static_cast<int>(std::lround(1.0 / h));
      const double err =
          spectral_norm(evolve(m, 1.0, L, 2, 1024) - ref.propagator);
      worst = std::max(worst, err);
    }
  }
  if (worst >= 1e-8) pass = false;
  {
    char buf[96];
    std::snprintf(buf, sizeof(buf), " [constant-coefficient diagonal: max err %.2e]",
                  worst);
    detail += buf;
  }

  // time-dependent diagonal: truncation annihilates exactly; the residual is
  // pure first-order quadrature
  const auto cz = model_cos_z();
  double worst_k = 0.0;
  for (int k = 2; k <= 3; ++k)
    worst_k = std::max(worst_k,
                       max_abs(omega_k_quadrature(cz, TimeInterval(0, 1.0), k, 1024)));
  if (worst_k > 1e-13) pass = false;
  const auto refz = exact_propagator(cz, TimeInterval(0, 1.0), 1e-12);
  const double errz = spectral_norm(evolve(cz, 1.0, 1, 2, 1024) - refz.propagator);
  auto [naz, napz] = sup_norms(cz, TimeInterval(0, 1.0), 257);
  const double qb = quadrature_bound_sum(2, 1.0, 1024, 1.05 * naz, 1.05 * napz);
  if (errz > qb) pass = false;
  {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  " [time-dep diagonal: Omega_k>=2 %.1e, err %.2e <= quad bound %.2e]",
                  worst_k, errz, qb);
    detail += buf;
  }
  if (now_s() - t_start > 30.0) {
    pass = false;
    detail += " [runtime over 30 s]";
  }
  report(2, "commutator scaling, commuting limit", pass, detail);
}

// --- criterion 3: cross-representation identity --------------------------
void criterion_3() {
  const auto t_start = now_s();
  bool pass = true;
  double worst = 0.0;
  std::mt19937 rng(20250809);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = (trial % 2) ? 4 : 2;
    const auto m = random_model(rng, dim, 1 + trial % 3);
    const TimeInterval iv(0, 0.5);
    for (int k : {2, 3, 4}) {
      for (int M : {4, 8, 16}) {
        const ComplexMatrix q = omega_k_quadrature(m, iv, k, M);
        const ComplexMatrix c = omega_k_commutator_form(m, iv, k, M);
        const double rel = (q - c).cwiseAbs().maxCoeff() / std::max(1.0, max_abs(q));
        worst = std::max(worst, rel);
      }
    }
  }
  if (worst > 1e-12) pass = false;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst relative deviation %.2e (tol 1e-12)", worst);
  std::string detail = buf;
  if (now_s() - t_start > 120.0) {
    pass = false;
    detail += " [runtime over 2 min]";
  }
  report(3, "cross-representation identity", pass, detail);
}

// --- criterion 4: quadrature bound ---------------------------------------
void criterion_4() {
  const auto t_start = now_s();
  bool pass = true;
  std::string detail;
  const std::vector<int> ms = {8, 16, 32, 64, 128};
  const double t = 0.5;
  int model_idx = 0;
  for (const auto& model : {model_cos_sin2(), model_cos_sin2_2q()}) {
    ++model_idx;
    auto [na, nap] = sup_norms(model, TimeInterval(0, t), 1025);
    na *= 1.05;
    nap *= 1.05;
    for (int k : {1, 2, 3}) {
      const ComplexMatrix ref = omega_k_quadrature(model, TimeInterval(0, t), k, 8 * 128);
      std::vector<double> xs, es;
      bool bounded = true;
      for (int M : ms) {
        const double err =
            spectral_norm(omega_k_quadrature(model, TimeInterval(0, t), k, M) - ref);
        if (err > quadrature_bound(k, t, M, na, nap)) bounded = false;
        xs.push_back(1.0 / M);
        es.push_back(err);
      }
      const double slope = fit_slope(xs, es);  // err vs 1/M: want +1, i.e. -1 vs M
      char buf[96];
      std::snprintf(buf, sizeof(buf), " [m%d k%d: slope %.2f bounded %d]", model_idx, k,
                    -slope, bounded ? 1 : 0);
      detail += buf;
      if (!bounded || std::abs(-slope - (-1.0)) > 0.15) pass = false;
    }
  }
  if (now_s() - t_start > 120.0) {
    pass = false;
    detail += " [runtime over 2 min]";
  }
  report(4, "quadrature bound and 1/M convergence", pass, detail);
}

// --- criterion 5: block-encoding identities -------------------------------
void criterion_5() {
  const auto t_start = now_s();
  bool pass = true;
  std::string detail;
  const double h = 0.5;

  // beta values pinned by the coefficient-register construction
  if (!(be::beta_k(2) == 1.0 && std::abs(be::beta_k(3) - 0.75) < 1e-15 &&
        std::abs(be::beta_k(4) - 0.75) < 1e-15)) {
    pass = false;
    detail += " [beta values wrong]";
  }

  // good-mass rational identities
  for (int k = 2; k <= 3; ++k) {
    for (int M : {4, 8}) {
      if (k > M) continue;
      const auto prep = be::prep_time_ordered(k, M);
      BigInt mk = 1;
      for (int i = 0; i < k; ++i) mk *= M;
      const Rational want(factorial_big(k) * binomial_big(M, k), mk);
      std::ostringstream os;
      os << boost::multiprecision::numerator(want) << "/"
         << boost::multiprecision::denominator(want);
      if (prep.good_mass_exact != os.str()) {
        pass = false;
        detail += " [good mass mismatch k=" + std::to_string(k) + "]";
      }
    }
  }

  double worst_dev = 0.0, worst_defect = 0.0;
  int combos = 0, skipped = 0;
  int model_idx = 0;
  for (const auto& model : {model_cos_sin2(), model_cos_sin2_2q()}) {
    ++model_idx;
    for (int M : {2, 4}) {
      double alpha = 0.0;
      for (int i = 0; i < M; ++i)
        alpha = std::max(alpha, spectral_norm(ham_eval(model, i * (h / M))));
      std::vector<be::BlockEncoding> parts;
      for (int k = 1; k <= 3; ++k) {
        if (k > M) break;
        be::BlockEncoding enc;
        try {
          enc = be::block_encode_omega_k(model, 0, h, k, M, alpha);
        } catch (const be::LayoutError&) {
          ++skipped;
          break;
        }
        const ComplexMatrix blk = be::extract_block(enc);
        const ComplexMatrix want = omega_k_quadrature(model, TimeInterval(0, h), k, M);
        const double dev = (blk * enc.sub - want).cwiseAbs().maxCoeff() /
                           std::max(1.0, max_abs(want));
        worst_dev = std::max(worst_dev, dev);
        double defect = enc.op.stagewise_defect();
        const double dd = enc.op.dense_defect();
        if (dd >= 0) defect = std::max(defect, dd);
        worst_defect = std::max(worst_defect, defect);
        ++combos;
        parts.push_back(std::move(enc));
      }
      // combined encodings for p = 1..#parts
      for (int p = 1; p <= static_cast<int>(parts.size()); ++p) {
        std::vector<be::BlockEncoding> sub(parts.begin(), parts.begin() + p);
        try {
          auto comb = be::lcu_combine(sub, model, alpha, h);
          const ComplexMatrix blk = be::extract_block(comb);
          const ComplexMatrix want = omega_p_sum(model, TimeInterval(0, h), p, M);
          const double dev = (blk * comb.sub - want).cwiseAbs().maxCoeff() /
                             std::max(1.0, max_abs(want));
          worst_dev = std::max(worst_dev, dev);
          double defect = comb.op.stagewise_defect();
          const double dd = comb.op.dense_defect();
          if (dd >= 0) defect = std::max(defect, dd);
          worst_defect = std::max(worst_defect, defect);
          ++combos;
        } catch (const be::LayoutError&) {
          ++skipped;  // p=3 at M=4 with 2 system qubits exceeds the 2^20 guard
        }
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                " [%d combos (%d over guard): worst dev %.2e, worst defect %.2e]",
                combos, skipped, worst_dev, worst_defect);
  detail += buf;
  if (worst_dev > 1e-10 || worst_defect > 1e-10 || combos < 12) pass = false;
  if (now_s() - t_start > 300.0) {
    pass = false;
    detail += " [runtime over 5 min]";
  }
  report(5, "block-encoding identities", pass, detail);
}

// --- criterion 6: bound validity -----------------------------------------
void criterion_6() {
  const auto m = model_cos_sin2();
  bool pass = true;
  double minimal_C = 0.0;
  for (int p : {1, 2}) {
    for (double h : {0.05, 0.1, 0.2}) {
      const TimeInterval iv(0, h);
      auto report_a = commutator_report(m, iv, 6, 7);
      for (auto& [q, v] : report_a.alpha) v *= 1.05;
      auto [na, nap] = sup_norms(m, iv, 129);
      const double qb = quadrature_bound_sum(p, h, 256, 1.05 * na, 1.05 * nap);
      const ComplexMatrix s = step(m, 0.0, h, p, 256);
      const auto ref = exact_propagator(m, iv, 1e-12);
      const double measured = spectral_norm(s - ref.propagator);
      // smallest C making the bound hold at this point
      const double base = local_truncation_bound(p, h, report_a, 0.0);
      const double slack = local_truncation_bound(p, h, report_a, 1.0) - base;
      double need = 0.0;
      if (measured > base + qb && slack > 0) need = (measured - base - qb) / slack;
      minimal_C = std::max(minimal_C, need);
    }
  }
  std::string detail;
  char buf[96];
  if (minimal_C <= 3.0) {
    std::snprintf(buf, sizeof(buf), "C = 3 suffices (minimal working C = %.3f)",
                  minimal_C);
  } else {
    std::snprintf(buf, sizeof(buf), "C = 3 fails; minimal working C = %.3f", minimal_C);
    if (minimal_C > 10.0) pass = false;
  }
  detail = buf;
  report(6, "short-time bound validity", pass, detail);
}

// --- criterion 7: planner consistency -------------------------------------
void criterion_7() {
  const auto t_start = now_s();
  bool pass = true;
  std::string detail;

  if (select_steps(1, 1.0, 1e-4, 1.0, 1.0) != 10000) {
    pass = false;
    detail += " [select_steps != 10000]";
  }

  double prev = -1.0;
  for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
    const auto plan = resource_estimate(2, 1.0, eps, 1.0, 1.0, 1.0, 0.5);
    if (prev >= 0 && plan.hamT_queries < prev) {
      pass = false;
      detail += " [not monotone in eps]";
    }
    prev = plan.hamT_queries;
  }

  int prev_p = 0;
  for (double eps : {1e-4, 1e-8, 1e-12}) {
    const auto [p_star, plan] = optimal_order(1.0, eps, 1.0, 1.0, 1.0, 0.5, 12);
    int brute = 1;
    double best = -1.0;
    for (int p = 1; p <= 12; ++p) {
      const auto pl = resource_estimate(p, 1.0, eps, 1.0, 1.0, 1.0, 0.5);
      if (best < 0 || pl.hamT_queries < best) {
        best = pl.hamT_queries;
        brute = p;
      }
    }
    if (p_star != brute) {
      pass = false;
      detail += " [argmin mismatch]";
    }
    if (p_star < prev_p) {
      pass = false;
      detail += " [p* not nondecreasing]";
    }
    if (p_star > 3.0 * std::log2(1.0 / eps)) {
      pass = false;
      detail += " [p* over 3 log2(1/eps)]";
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), " [eps %.0e -> p* %d]", eps, p_star);
    detail += buf;
    prev_p = p_star;
  }
  if (now_s() - t_start > 5.0) {
    pass = false;
    detail += " [runtime over 5 s]";
  }
  report(7, "planner consistency", pass, detail);
}

// --- criterion 8: reference trustworthiness -------------------------------
void criterion_8() {
  bool pass = true;
  std::string detail;

  const auto r1 = exact_propagator(model_const_z(), TimeInterval(0, M_PI), 1e-12);
  const double e1 =
      spectral_norm(r1.propagator + ComplexMatrix::Identity(2, 2));
  if (e1 > 1e-11) pass = false;

  const auto r2 = exact_propagator(model_cos_z(), TimeInterval(0, M_PI / 2), 1e-12);
  const double e2 = spectral_norm(
      r2.propagator - expm(Complex(0, -1) * pauli('Z')));
  if (e2 > 1e-11) pass = false;

  const auto m = model_cos_sin2();
  const auto u01 = exact_propagator(m, TimeInterval(0, 1), 1e-12);
  const auto u12 = exact_propagator(m, TimeInterval(1, 2), 1e-12);
  const auto u02 = exact_propagator(m, TimeInterval(0, 2), 1e-12);
  const double e3 = spectral_norm(
      ComplexMatrix(u12.propagator * u01.propagator) - u02.propagator);
  if (e3 > 2e-12) pass = false;

  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "analytic errs %.1e / %.1e, composition defect %.1e", e1, e2, e3);
  detail = buf;
  report(8, "reference trustworthiness", pass, detail);
}

}  // namespace

int main() {
  std::printf("magnus-lab acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
