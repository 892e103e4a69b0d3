#include <doctest.h>

#include "maglab/reference.hpp"
#include "test_util.hpp"

using namespace maglab;
using namespace maglab::testutil;

TEST_CASE("time-independent case is exact") {
  const auto r = exact_propagator(model_const_z(), TimeInterval(0, M_PI), 1e-12);
  CHECK((r.propagator + ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(r.error_estimate <= 1e-12);
}

TEST_CASE("commuting case matches the analytic coefficient integral") {
  // U = exp(-i Z int_0^{pi/2} cos) = exp(-i Z)
  const auto r = exact_propagator(model_cos_z(), TimeInterval(0, M_PI / 2), 1e-12);
  const ComplexMatrix want = expm(Complex(0, -1) * pauli('Z'));
  CHECK(spectral_norm(r.propagator - want) < 1e-11);
}

TEST_CASE("flow composition") {
  const auto m = model_cos_sin2();
  const auto u01 = exact_propagator(m, TimeInterval(0, 1), 1e-12);
  const auto u12 = exact_propagator(m, TimeInterval(1, 2), 1e-12);
  const auto u02 = exact_propagator(m, TimeInterval(0, 2), 1e-12);
  CHECK(spectral_norm(ComplexMatrix(u12.propagator * u01.propagator) - u02.propagator) <=
        2e-12);
}

TEST_CASE("tolerance tightening is consistent") {
  const auto m = model_cos_sin();
  const auto loose = exact_propagator(m, TimeInterval(0, 1), 1e-8);
  const auto tight = exact_propagator(m, TimeInterval(0, 1), 1e-9);
  CHECK(spectral_norm(loose.propagator - tight.propagator) <= 1.5e-8);
}

TEST_CASE("unitarity defect within the error estimate") {
  const auto m = model_cos_sin2();
  const auto r = exact_propagator(m, TimeInterval(0, 1), 1e-10);
  CHECK(unitarity_defect(r.propagator) <= r.error_estimate);
  CHECK(r.error_estimate <= 1e-10);
}

TEST_CASE("guards") {
  CHECK_THROWS_AS(exact_propagator(model_cos_z(), TimeInterval(0, 1), 1e-14),
                  std::invalid_argument);
}
