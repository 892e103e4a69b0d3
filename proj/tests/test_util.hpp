#ifndef MAGLAB_TEST_UTIL_HPP
#define MAGLAB_TEST_UTIL_HPP

#include <random>

#include "maglab/hamiltonian.hpp"

namespace maglab::testutil {

inline ComplexMatrix pauli(char c) { return pauli_matrix(std::string(1, c)); }

// cos(t) X + sin(t) Z
inline HamiltonianModel model_cos_sin() {
  return HamiltonianModel(2, {{coeff_cos(1.0), pauli('X')}, {coeff_sin(1.0), pauli('Z')}});
}

// cos(t) X + sin(2t) Z -- the designated noncommuting test model
inline HamiltonianModel model_cos_sin2() {
  return HamiltonianModel(
      2, {{coeff_cos(1.0), pauli('X')}, {coeff_sin(1.0, 2.0), pauli('Z')}});
}

// cos(t) X(x)I + sin(2t) Z(x)Z -- two-qubit variant
inline HamiltonianModel model_cos_sin2_2q() {
  return HamiltonianModel(4, {{coeff_cos(1.0), pauli_matrix("XI")},
                              {coeff_sin(1.0, 2.0), pauli_matrix("ZZ")}});
}

inline HamiltonianModel model_const_z() {
  return HamiltonianModel(2, {{coeff_const(1.0), pauli('Z')}});
}

inline HamiltonianModel model_cos_z() {
  return HamiltonianModel(2, {{coeff_cos(1.0), pauli('Z')}});
}

// Random Hermitian with ||.|| <= 1
inline ComplexMatrix random_hermitian(std::mt19937& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = Complex(n(rng), n(rng));
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  const double nrm = spectral_norm(h);
  if (nrm > 0) h /= nrm;
  return h;
}

inline ScalarCoeff random_coeff(std::mt19937& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  switch (kind(rng)) {
    case 0:
      return coeff_const(u(rng));
    case 1:
      return coeff_cos(u(rng), 1.0 + u(rng), u(rng));
    case 2:
      return coeff_sin(u(rng), 1.0 + u(rng), u(rng));
    default:
      return coeff_monomial(u(rng), 1 + (kind(rng) & 1));
  }
}

inline HamiltonianModel random_model(std::mt19937& rng, int dim, int terms) {
  std::vector<std::pair<ScalarCoeff, ComplexMatrix>> ts;
  for (int i = 0; i < terms; ++i)
    ts.emplace_back(random_coeff(rng), random_hermitian(rng, dim));
  return HamiltonianModel(dim, std::move(ts));
}

}  // namespace maglab::testutil

#endif
