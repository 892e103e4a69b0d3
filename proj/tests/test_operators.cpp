#include <doctest.h>

#include <random>

#include "maglab/reference.hpp"
#include "test_util.hpp"

using namespace maglab;
using namespace maglab::testutil;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("ham_eval basics") {
  CHECK(max_abs(ham_eval(model_cos_z(), 0.0) - pauli('Z')) < 1e-15);

  const auto m = model_cos_sin();
  CHECK(max_abs(ham_eval(m, M_PI / 2) - pauli('Z')) < 1e-12);

  HamiltonianModel poly(2, {{coeff_monomial(1.0, 2), pauli('X')}});
  CHECK(max_abs(ham_eval(poly, 3.0) - 9.0 * pauli('X')) < 1e-12);
}

TEST_CASE("a_eval is -i H and anti-Hermitian") {
  const Complex mi(0, -1);
  CHECK(max_abs(a_eval(model_const_z(), 0.0) - mi * pauli('Z')) < 1e-15);

  HamiltonianModel cx(2, {{coeff_cos(1.0), pauli('X')}});
  const ComplexMatrix a = a_eval(cx, 1.0);
  CHECK(max_abs(a + a.adjoint()) < 1e-15);

  HamiltonianModel tx(2, {{coeff_monomial(1.0, 1), pauli('X')}});
  CHECK(max_abs(a_eval(tx, 2.0) - mi * 2.0 * pauli('X')) < 1e-14);
}

TEST_CASE("ham_derivative analytic and against finite differences") {
  CHECK(max_abs(ham_derivative(model_cos_z(), 0.0)) < 1e-15);

  HamiltonianModel tx(2, {{coeff_monomial(1.0, 1), pauli('X')}});
  CHECK(max_abs(ham_derivative(tx, 0.7) - pauli('X')) < 1e-15);

  HamiltonianModel m(2, {{coeff_cos(1.0, 2.0), pauli('X')}, {coeff_sin(1.0), pauli('Z')}});
  const double t = 0.3, s = 1e-5;
  const ComplexMatrix fd = (ham_eval(m, t + s) - ham_eval(m, t - s)) / (2 * s);
  CHECK(max_abs(ham_derivative(m, t) - fd) < 1e-8);
}

TEST_CASE("ham_derivative matches finite differences on all coefficient kinds") {
  std::vector<ScalarCoeff> coeffs = {coeff_const(0.8), coeff_cos(0.5, 1.7, 0.2),
                                     coeff_sin(-1.1, 0.9, -0.4), coeff_monomial(0.6, 3),
                                     coeff_monomial(2.0, 0)};
  for (const auto& f : coeffs) {
    HamiltonianModel m(2, {{f, pauli('X')}});
    for (double t : {0.1, 0.5, 1.3}) {
      const double s = 1e-5;
      const ComplexMatrix fd = (ham_eval(m, t + s) - ham_eval(m, t - s)) / (2 * s);
      CHECK(max_abs(ham_derivative(m, t) - fd) < 1e-7);
    }
  }
}

TEST_CASE("spectral_norm") {
  CHECK(spectral_norm(pauli('Z')) == doctest::Approx(1.0).epsilon(1e-12));
  ComplexMatrix n(2, 2);
  n << 0, 2, 0, 0;
  CHECK(spectral_norm(n) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spectral_norm(commutator(pauli('X'), pauli('Z'))) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("spectral_norm is submultiplicative on random pairs") {
  std::mt19937 rng(7);
  for (int i = 0; i < 20; ++i) {
    const ComplexMatrix a = 2.5 * random_hermitian(rng, 3);
    const ComplexMatrix b = 1.5 * random_hermitian(rng, 3);
    CHECK(spectral_norm(a * b) <= spectral_norm(a) * spectral_norm(b) + 1e-10);
  }
}

TEST_CASE("commutator") {
  CHECK(max_abs(commutator(pauli('X'), pauli('X'))) < 1e-15);

  ComplexMatrix m2iy(2, 2);
  m2iy << 0, -2, 2, 0;  // -2i Y
  CHECK(max_abs(commutator(pauli('X'), pauli('Z')) - m2iy) < 1e-15);

  std::mt19937 rng(3);
  const ComplexMatrix a = random_hermitian(rng, 3), b = random_hermitian(rng, 3);
  CHECK(max_abs(commutator(a, b) + commutator(b, a)) < 1e-14);

  ComplexMatrix bad(3, 3);
  CHECK_THROWS_AS(commutator(pauli('X'), bad), std::invalid_argument);
}

TEST_CASE("nested_commutator") {
  auto comb2 = right_comb_tree(2);
  ComplexMatrix m2iy(2, 2);
  m2iy << 0, -2, 2, 0;
  CHECK(max_abs(nested_commutator(*comb2, {pauli('X'), pauli('Z')}) - m2iy) < 1e-15);

  auto comb3 = right_comb_tree(3);
  CHECK(max_abs(nested_commutator(*comb3, {pauli('X'), pauli('Z'), pauli('Z')})) < 1e-15);

  for (const auto& tree : enumerate_comm_trees(4)) {
    CHECK(max_abs(nested_commutator(
              *tree, {pauli('Z'), pauli('Z'), pauli('Z'), pauli('Z')})) < 1e-15);
  }

  CHECK_THROWS_AS(nested_commutator(*comb3, {pauli('X'), pauli('Z')}),
                  std::invalid_argument);
}

TEST_CASE("enumerate_comm_trees counts Catalan(q-1)") {
  CHECK(enumerate_comm_trees(2).size() == 1);
  CHECK(enumerate_comm_trees(3).size() == 2);
  CHECK(enumerate_comm_trees(4).size() == 5);
  CHECK(enumerate_comm_trees(5).size() == 14);
  CHECK(enumerate_comm_trees(6).size() == 42);
}

TEST_CASE("expm basics") {
  CHECK(max_abs(expm(ComplexMatrix::Zero(3, 3)) - ComplexMatrix::Identity(3, 3)) <
        1e-15);

  const Complex i(0, 1);
  ComplexMatrix diag = expm(-i * (M_PI / 2) * pauli('Z'));
  ComplexMatrix want(2, 2);
  want << -i, 0, 0, i;
  CHECK(max_abs(diag - want) < 1e-14);

  ComplexMatrix nil(2, 2);
  nil << 0, 1, 0, 0;
  ComplexMatrix wantn(2, 2);
  wantn << 1, 1, 0, 1;
  CHECK(max_abs(expm(nil) - wantn) < 1e-14);
}

TEST_CASE("expm inverse property for anti-Hermitian arguments") {
  std::mt19937 rng(11);
  for (int d : {2, 4, 8}) {
    ComplexMatrix m = Complex(0, 1) * (4.9 * random_hermitian(rng, d));
    ComplexMatrix prod = expm(m) * expm(ComplexMatrix(-m));
    CHECK(max_abs(prod - ComplexMatrix::Identity(d, d)) < 1e-10);
  }
}

TEST_CASE("expm accuracy against eigendecomposition for larger norms") {
  std::mt19937 rng(13);
  const ComplexMatrix hmat = random_hermitian(rng, 4);
  const ComplexMatrix m = Complex(0, -1) * 19.0 * hmat;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hmat);
  ComplexMatrix want = es.eigenvectors() *
                       (Complex(0, -19.0) * es.eigenvalues().array().cast<Complex>())
                           .exp()
                           .matrix()
                           .asDiagonal() *
                       es.eigenvectors().adjoint();
  CHECK(spectral_norm(expm(m) - want) < 1e-12);
}

TEST_CASE("sup_norms") {
  auto [na0, nap0] = sup_norms(model_const_z(), TimeInterval(0, 5), 16);
  CHECK(na0 == doctest::Approx(1.0));
  CHECK(nap0 == doctest::Approx(0.0));

  auto [na1, nap1] = sup_norms(model_cos_z(), TimeInterval(0, 2 * M_PI), 1001);
  CHECK(std::abs(na1 - 1.0) < 1e-5);
  CHECK(std::abs(nap1 - 1.0) < 1e-5);

  HamiltonianModel tx(2, {{coeff_monomial(1.0, 1), pauli('X')}});
  auto [na2, nap2] = sup_norms(tx, TimeInterval(0, 2), 3);
  CHECK(na2 == doctest::Approx(2.0));
  CHECK(nap2 == doctest::Approx(1.0));

  CHECK_THROWS_AS(sup_norms(tx, TimeInterval(0, 1), 1), std::invalid_argument);
}

TEST_CASE("hermiticity invariants on random models") {
  std::mt19937 rng(23);
  for (int i = 0; i < 10; ++i) {
    const auto m = random_model(rng, 4, 2);
    for (double t : {0.0, 0.4, 1.7}) {
      CHECK(is_hermitian(ham_eval(m, t), 1e-12));
      CHECK(is_anti_hermitian(a_eval(m, t), 1e-12));
    }
  }
}

TEST_CASE("model JSON round trip and strict keys") {
  const std::string text = R"({
    "dim": 2,
    "terms": [
      {"matrix": {"pauli": "X"}, "coeff": {"kind": "cos", "scale": 1.0}},
      {"matrix": {"dense_re": [[1,0],[0,-1]], "dense_im": [[0,0],[0,0]]},
       "coeff": {"kind": "sin", "scale": 1.0, "omega": 2.0}}
    ]
  })";
  const auto m = model_from_json_text(text);
  CHECK(m.dim() == 2);
  CHECK(m.terms().size() == 2);
  CHECK(max_abs(ham_eval(m, 0.3) - ham_eval(model_cos_sin2(), 0.3)) < 1e-14);

  const auto again = model_from_json_text(model_to_json_text(m));
  CHECK(max_abs(ham_eval(again, 0.77) - ham_eval(m, 0.77)) < 1e-14);

  CHECK_THROWS_AS(model_from_json_text(R"({"dim": 2, "terms": [], "extra": 1})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      model_from_json_text(
          R"({"dim": 2, "terms": [{"matrix": {"pauli": "X"}, "coeff": {"kind": "cos", "frequency": 2}}]})"),
      std::invalid_argument);
  // non-Hermitian dense matrix rejected
  CHECK_THROWS_AS(
      model_from_json_text(
          R"({"dim": 2, "terms": [{"matrix": {"dense_re": [[0,1],[0,0]]}, "coeff": {"kind": "const"}}]})"),
      std::invalid_argument);
}

TEST_CASE("pauli strings") {
  CHECK(max_abs(pauli_matrix("XZ") - kron(pauli('X'), pauli('Z'))) < 1e-15);
  CHECK(pauli_matrix("IXY").rows() == 8);
  CHECK_THROWS_AS(pauli_matrix("Q"), std::invalid_argument);
}

TEST_CASE("unitarity_defect") {
  CHECK(unitarity_defect(ComplexMatrix::Identity(3, 3)) == doctest::Approx(0.0));
  CHECK(unitarity_defect(2.0 * ComplexMatrix::Identity(2, 2)) ==
        doctest::Approx(3.0).epsilon(1e-12));
}
