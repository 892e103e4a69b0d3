#include "maglab/hamiltonian.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

namespace maglab {

using nlohmann::json;

double ScalarCoeff::eval(double t) const {
  switch (kind) {
    case Kind::Const:
      return scale;
    case Kind::Cos:
      return scale * std::cos(omega * t + phase);
    case Kind::Sin:
      return scale * std::sin(omega * t + phase);
    case Kind::Monomial:
      return scale * std::pow(t, power);
  }
  return 0.0;
}

double ScalarCoeff::deriv(double t) const {
  switch (kind) {
    case Kind::Const:
      return 0.0;
    case Kind::Cos:
      return -scale * omega * std::sin(omega * t + phase);
    case Kind::Sin:
      return scale * omega * std::cos(omega * t + phase);
    case Kind::Monomial:
      if (power == 0) return 0.0;
      return scale * power * std::pow(t, power - 1);
  }
  return 0.0;
}

ScalarCoeff coeff_const(double c) {
  ScalarCoeff f;
  f.kind = ScalarCoeff::Kind::Const;
  f.scale = c;
  return f;
}

ScalarCoeff coeff_cos(double scale, double omega, double phase) {
  ScalarCoeff f;
  f.kind = ScalarCoeff::Kind::Cos;
  f.scale = scale;
  f.omega = omega;
  f.phase = phase;
  return f;
}

ScalarCoeff coeff_sin(double scale, double omega, double phase) {
  ScalarCoeff f;
  f.kind = ScalarCoeff::Kind::Sin;
  f.scale = scale;
  f.omega = omega;
  f.phase = phase;
  return f;
}

ScalarCoeff coeff_monomial(double scale, int power) {
  if (power < 0) throw std::invalid_argument("monomial power must be >= 0");
  ScalarCoeff f;
  f.kind = ScalarCoeff::Kind::Monomial;
  f.scale = scale;
  f.power = power;
  return f;
}

TimeInterval::TimeInterval(double a, double b) : t0(a), t1(b) {
  if (!(t1 > t0)) throw std::invalid_argument("TimeInterval requires t1 > t0");
}

HamiltonianModel::HamiltonianModel(
    int dim, std::vector<std::pair<ScalarCoeff, ComplexMatrix>> terms)
    : dim_(dim), terms_(std::move(terms)) {
  if (dim_ < 1) throw std::invalid_argument("model dim must be >= 1");
  for (const auto& [f, m] : terms_) {
    (void)f;
    if (m.rows() != dim_ || m.cols() != dim_)
      throw std::invalid_argument("term matrix dimension mismatch");
    if (!is_hermitian(m, 1e-12))
      throw std::invalid_argument("term matrix not Hermitian to 1e-12");
  }
}

bool HamiltonianModel::all_diagonal() const {
  for (const auto& [f, m] : terms_) {
    (void)f;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (i != j && std::abs(m(i, j)) != 0.0) return false;
  }
  return true;
}

ComplexMatrix ham_eval(const HamiltonianModel& model, double t) {
  ComplexMatrix h = ComplexMatrix::Zero(model.dim(), model.dim());
  for (const auto& [f, m] : model.terms()) h += f.eval(t) * m;
  return h;
}

ComplexMatrix a_eval(const HamiltonianModel& model, double t) {
  return Complex(0, -1) * ham_eval(model, t);
}

ComplexMatrix ham_derivative(const HamiltonianModel& model, double t) {
  ComplexMatrix h = ComplexMatrix::Zero(model.dim(), model.dim());
  for (const auto& [f, m] : model.terms()) h += f.deriv(t) * m;
  return h;
}

std::pair<double, double> sup_norms(const HamiltonianModel& model,
                                    const TimeInterval& interval, int samples) {
  if (samples < 2) throw std::invalid_argument("sup_norms: samples must be >= 2");
  double na = 0.0, nap = 0.0;
  const double step = interval.span() / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double t = interval.t0 + i * step;
    na = std::max(na, spectral_norm(ham_eval(model, t)));
    nap = std::max(nap, spectral_norm(ham_derivative(model, t)));
  }
  return {na, nap};
}

ComplexMatrix pauli_matrix(const std::string& word) {
  if (word.empty()) throw std::invalid_argument("empty Pauli string");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : word) {
    ComplexMatrix p(2, 2);
    switch (c) {
      case 'I':
        p << 1, 0, 0, 1;
        break;
      case 'X':
        p << 0, 1, 1, 0;
        break;
      case 'Y':
        p << 0, Complex(0, -1), Complex(0, 1), 0;
        break;
      case 'Z':
        p << 1, 0, 0, -1;
        break;
      default:
        throw std::invalid_argument(std::string("bad Pauli letter: ") + c);
    }
    out = kron(out, p);
  }
  return out;
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

ScalarCoeff coeff_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("coeff must be an object");
  reject_unknown_keys(j, {"kind", "scale", "omega", "phase", "power"}, "coeff");
  const std::string kind = j.at("kind").get<std::string>();
  const double scale = j.value("scale", 1.0);
  const double omega = j.value("omega", 1.0);
  const double phase = j.value("phase", 0.0);
  const int power = j.value("power", 1);
  if (kind == "const") return coeff_const(scale);
  if (kind == "cos") return coeff_cos(scale, omega, phase);
  if (kind == "sin") return coeff_sin(scale, omega, phase);
  if (kind == "monomial") return coeff_monomial(scale, power);
  throw std::invalid_argument("unknown coeff kind: " + kind);
}

ComplexMatrix matrix_from_json(const json& j, int dim) {
  if (!j.is_object()) throw std::invalid_argument("matrix must be an object");
  if (j.contains("pauli")) {
    reject_unknown_keys(j, {"pauli"}, "matrix");
    ComplexMatrix m = pauli_matrix(j.at("pauli").get<std::string>());
    if (m.rows() != dim)
      throw std::invalid_argument("Pauli string dimension does not match dim");
    return m;
  }
  reject_unknown_keys(j, {"dense_re", "dense_im"}, "matrix");
  const auto re = j.at("dense_re").get<std::vector<std::vector<double>>>();
  std::vector<std::vector<double>> im;
  if (j.contains("dense_im"))
    im = j.at("dense_im").get<std::vector<std::vector<double>>>();
  ComplexMatrix m(dim, dim);
  if (static_cast<int>(re.size()) != dim)
    throw std::invalid_argument("dense_re row count mismatch");
  for (int r = 0; r < dim; ++r) {
    if (static_cast<int>(re[r].size()) != dim)
      throw std::invalid_argument("dense_re column count mismatch");
    for (int c = 0; c < dim; ++c) {
      double imag = 0.0;
      if (!im.empty()) {
        if (static_cast<int>(im.size()) != dim ||
            static_cast<int>(im[r].size()) != dim)
          throw std::invalid_argument("dense_im shape mismatch");
        imag = im[r][c];
      }
      m(r, c) = Complex(re[r][c], imag);
    }
  }
  return m;
}

}  // namespace

HamiltonianModel model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("model must be a JSON object");
  reject_unknown_keys(j, {"dim", "terms"}, "model");
  const int dim = j.at("dim").get<int>();
  std::vector<std::pair<ScalarCoeff, ComplexMatrix>> terms;
  for (const auto& t : j.at("terms")) {
    if (!t.is_object()) throw std::invalid_argument("term must be an object");
    reject_unknown_keys(t, {"matrix", "coeff"}, "term");
    terms.emplace_back(coeff_from_json(t.at("coeff")),
                       matrix_from_json(t.at("matrix"), dim));
  }
  return HamiltonianModel(dim, std::move(terms));
}

HamiltonianModel model_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

std::string model_to_json_text(const HamiltonianModel& model) {
  json j;
  j["dim"] = model.dim();
  j["terms"] = json::array();
  for (const auto& [f, m] : model.terms()) {
    json t;
    switch (f.kind) {
      case ScalarCoeff::Kind::Const:
        t["coeff"] = {{"kind", "const"}, {"scale", f.scale}};
        break;
      case ScalarCoeff::Kind::Cos:
        t["coeff"] = {{"kind", "cos"}, {"scale", f.scale}, {"omega", f.omega},
                      {"phase", f.phase}};
        break;
      case ScalarCoeff::Kind::Sin:
        t["coeff"] = {{"kind", "sin"}, {"scale", f.scale}, {"omega", f.omega},
                      {"phase", f.phase}};
        break;
      case ScalarCoeff::Kind::Monomial:
        t["coeff"] = {{"kind", "monomial"}, {"scale", f.scale}, {"power", f.power}};
        break;
    }
    std::vector<std::vector<double>> re(model.dim(), std::vector<double>(model.dim()));
    std::vector<std::vector<double>> im(model.dim(), std::vector<double>(model.dim()));
    for (int r = 0; r < model.dim(); ++r)
      for (int c = 0; c < model.dim(); ++c) {
        re[r][c] = m(r, c).real();
        im[r][c] = m(r, c).imag();
      }
    t["matrix"] = {{"dense_re", re}, {"dense_im", im}};
    j["terms"].push_back(t);
  }
  return j.dump(2);
}

}  // namespace maglab
