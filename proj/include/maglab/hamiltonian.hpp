#ifndef MAGLAB_HAMILTONIAN_HPP
#define MAGLAB_HAMILTONIAN_HPP

#include <string>
#include <utility>
#include <vector>

#include "maglab/matrix.hpp"

namespace maglab {

// Closed set of scalar coefficient functions. Closed so that analytic
// derivatives and config-file serialization stay exact.
struct ScalarCoeff {
  enum class Kind { Const, Cos, Sin, Monomial };
  Kind kind = Kind::Const;
  double scale = 1.0;
  double omega = 1.0;  // cos/sin only
  double phase = 0.0;  // cos/sin only
  int power = 1;       // monomial only, >= 0

  double eval(double t) const;
  double deriv(double t) const;
};

ScalarCoeff coeff_const(double c);
ScalarCoeff coeff_cos(double scale, double omega = 1.0, double phase = 0.0);
ScalarCoeff coeff_sin(double scale, double omega = 1.0, double phase = 0.0);
ScalarCoeff coeff_monomial(double scale, int power);

struct TimeInterval {
  double t0 = 0.0;
  double t1 = 0.0;
  TimeInterval() = default;
  TimeInterval(double a, double b);
  double span() const { return t1 - t0; }
};

// H(t) = sum_j f_j(t) H_j with every H_j Hermitian (validated on
// construction to 1e-12).
class HamiltonianModel {
 public:
  HamiltonianModel(int dim, std::vector<std::pair<ScalarCoeff, ComplexMatrix>> terms);

  int dim() const { return dim_; }
  const std::vector<std::pair<ScalarCoeff, ComplexMatrix>>& terms() const {
    return terms_;
  }
  // True when all term matrices are diagonal (commuting model).
  bool all_diagonal() const;

 private:
  int dim_;
  std::vector<std::pair<ScalarCoeff, ComplexMatrix>> terms_;
};

ComplexMatrix ham_eval(const HamiltonianModel& model, double t);
// A(t) = -i H(t)
ComplexMatrix a_eval(const HamiltonianModel& model, double t);
ComplexMatrix ham_derivative(const HamiltonianModel& model, double t);

// Max of ||A|| and ||H'|| over a uniform inclusive grid of `samples` points;
// a grid lower bound of the true sup.
std::pair<double, double> sup_norms(const HamiltonianModel& model,
                                    const TimeInterval& interval, int samples);

// "XZ", "IXY", ... expanded by Kronecker product.
ComplexMatrix pauli_matrix(const std::string& word);

// JSON schema:
// {"dim": int, "terms": [{"matrix": {"pauli": "XZ"} |
//   {"dense_re": [[..]], "dense_im": [[..]]},
//   "coeff": {"kind": "const"|"cos"|"sin"|"monomial",
//             "scale": f, "omega": f, "phase": f, "power": int}}]}
// Unknown keys rejected.
HamiltonianModel model_from_json_text(const std::string& text);
HamiltonianModel model_from_json_file(const std::string& path);
std::string model_to_json_text(const HamiltonianModel& model);

}  // namespace maglab

#endif
