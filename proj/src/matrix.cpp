#include "maglab/matrix.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace maglab {

double spectral_norm(const ComplexMatrix& m) {
  if (m.rows() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  if (m.rows() == 2 && m.cols() == 2) {
    // closed form from the Frobenius norm and determinant
    const double f2 = m.squaredNorm();
    const double ad = std::norm(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    const double disc = std::sqrt(std::max(0.0, f2 * f2 - 4.0 * ad));
    return std::sqrt(0.5 * (f2 + disc));
  }
  if (m.rows() <= 64 && m.cols() <= 64) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_anti_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m + m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  ComplexMatrix d = m.adjoint() * m;
  d -= ComplexMatrix::Identity(m.rows(), m.cols());
  return spectral_norm(d) <= tol;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("commutator: dimension mismatch");
  return a * b - b * a;
}

std::shared_ptr<CommTree> CommTree::make_leaf(int index) {
  auto t = std::make_shared<CommTree>();
  t->leaf = index;
  return t;
}

std::shared_ptr<CommTree> CommTree::make_node(std::shared_ptr<CommTree> l,
                                              std::shared_ptr<CommTree> r) {
  auto t = std::make_shared<CommTree>();
  t->left = std::move(l);
  t->right = std::move(r);
  return t;
}

int CommTree::leaf_count() const {
  if (leaf >= 0) return 1;
  return left->leaf_count() + right->leaf_count();
}

std::shared_ptr<CommTree> right_comb_tree(int leaves) {
  if (leaves < 1) throw std::invalid_argument("right_comb_tree: leaves < 1");
  auto t = CommTree::make_leaf(leaves - 1);
  for (int i = leaves - 2; i >= 0; --i)
    t = CommTree::make_node(CommTree::make_leaf(i), std::move(t));
  return t;
}

namespace {

std::vector<std::shared_ptr<CommTree>> enumerate_offset(int leaves, int offset) {
  std::vector<std::shared_ptr<CommTree>> out;
  if (leaves == 1) {
    out.push_back(CommTree::make_leaf(offset));
    return out;
  }
  for (int m = 1; m < leaves; ++m) {
    auto ls = enumerate_offset(m, offset);
    auto rs = enumerate_offset(leaves - m, offset + m);
    for (const auto& l : ls)
      for (const auto& r : rs) out.push_back(CommTree::make_node(l, r));
  }
  return out;
}

}  // namespace

std::vector<std::shared_ptr<CommTree>> enumerate_comm_trees(int leaves) {
  if (leaves < 1) throw std::invalid_argument("enumerate_comm_trees: leaves < 1");
  return enumerate_offset(leaves, 0);
}

ComplexMatrix nested_commutator(const CommTree& shape,
                                const std::vector<ComplexMatrix>& leaves) {
  if (shape.leaf_count() != static_cast<int>(leaves.size()))
    throw std::invalid_argument("nested_commutator: arity mismatch");
  const Eigen::Index d = leaves.empty() ? 0 : leaves[0].rows();
  for (const auto& m : leaves)
    if (m.rows() != d || m.cols() != d)
      throw std::invalid_argument("nested_commutator: dimension mismatch");

  struct Eval {
    const std::vector<ComplexMatrix>& lv;
    ComplexMatrix run(const CommTree& t) const {
      if (t.leaf >= 0) return lv[static_cast<std::size_t>(t.leaf)];
      return commutator(run(*t.left), run(*t.right));
    }
  };
  return Eval{leaves}.run(shape);
}

namespace {

// (13,13)-Pade approximant pieces, after Higham / the usual scaling-and-
// squaring cascade for double precision.
void pade3(const ComplexMatrix& a, ComplexMatrix& u, ComplexMatrix& v) {
  const double b[] = {120., 60., 12., 1.};
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix id = ComplexMatrix::Identity(a.rows(), a.cols());
  u = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

void pade5(const ComplexMatrix& a, ComplexMatrix& u, ComplexMatrix& v) {
  const double b[] = {30240., 15120., 3360., 420., 30., 1.};
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix id = ComplexMatrix::Identity(a.rows(), a.cols());
  u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade7(const ComplexMatrix& a, ComplexMatrix& u, ComplexMatrix& v) {
  const double b[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  const ComplexMatrix id = ComplexMatrix::Identity(a.rows(), a.cols());
  u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade13(const ComplexMatrix& a, ComplexMatrix& u, ComplexMatrix& v) {
  const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                      1187353796428800.,  129060195264000.,   10559470521600.,
                      670442572800.,      33522128640.,       1323241920.,
                      40840800.,          960960.,            16380.,
                      182.,               1.};
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  const ComplexMatrix id = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix w = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  u = a * (w + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

ComplexMatrix expm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: non-square");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;

  const double l1 = m.cwiseAbs().colwise().sum().maxCoeff();
  ComplexMatrix u, v;
  int squarings = 0;
  if (l1 < 1.495585217958292e-2) {
    pade3(m, u, v);
  } else if (l1 < 2.539398330063230e-1) {
    pade5(m, u, v);
  } else if (l1 < 9.504178996162932e-1) {
    pade7(m, u, v);
  } else {
    const double maxnorm = 5.371920351148152;
    std::frexp(l1 / maxnorm, &squarings);
    if (squarings < 0) squarings = 0;
    ComplexMatrix a = m * std::ldexp(1.0, -squarings);
    pade13(a, u, v);
  }
  ComplexMatrix numer = v + u;
  ComplexMatrix denom = v - u;
  ComplexMatrix r = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace maglab
