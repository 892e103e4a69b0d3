// Compares the production kernels (prefix/suffix regrouped sums, OpenMP
// parallel loops) against the serial reference enumerations they are tested
// against.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "maglab/bounds.hpp"
#include "maglab/magnus.hpp"

using namespace maglab;

namespace {

double time_s(const std::function<void()>& fn, int reps) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(clock::now() - t0).count() / reps;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif

  HamiltonianModel model(4, {{coeff_cos(1.0), pauli_matrix("XI")},
                             {coeff_sin(1.0, 2.0), pauli_matrix("ZZ")}});
  const TimeInterval iv(0, 0.5);

  std::printf("%-34s %12s %12s %9s\n", "kernel", "ref [s]", "fast [s]", "speedup");

  for (auto [k, M, reps] : {std::tuple{2, 192, 3}, std::tuple{3, 96, 1},
                            std::tuple{4, 28, 1}}) {
    ComplexMatrix a, b;
    const double tr = time_s([&] { a = omega_k_quadrature_ref(model, iv, k, M); }, reps);
    const double tf = time_s([&] { b = omega_k_quadrature(model, iv, k, M); }, reps);
    const double dev = (a - b).cwiseAbs().maxCoeff();
    std::printf("omega_%d_quadrature (M=%-3d)        %12.4f %12.4f %8.1fx  (dev %.1e)\n",
                k, M, tr, tf, tr / tf, dev);
  }

  {
    double a = 0, b = 0;
    const double tr = time_s([&] { a = alpha_comm_ref(model, iv, 4, 10); }, 1);
    const double tf = time_s([&] { b = alpha_comm(model, iv, 4, 10); }, 1);
    std::printf("alpha_comm (q=4, samples=10)       %12.4f %12.4f %8.1fx  (dev %.1e)\n",
                tr, tf, tr / tf, std::abs(a - b));
  }

  {
    ComplexMatrix u;
    const double t = time_s([&] { u = evolve(model, 1.0, 8, 3, 64); }, 1);
    std::printf("evolve (L=8, p=3, M=64)            %12s %12.4f\n", "-", t);
  }
  return 0;
}
