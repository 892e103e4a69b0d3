#ifndef MAGLAB_MATRIX_HPP
#define MAGLAB_MATRIX_HPP

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

namespace maglab {

using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Largest singular value via full SVD. Dims here are tiny (<= 64), so no
// iterative methods.
double spectral_norm(const ComplexMatrix& m);

bool is_hermitian(const ComplexMatrix& m, double tol);
bool is_anti_hermitian(const ComplexMatrix& m, double tol);
bool is_unitary(const ComplexMatrix& m, double tol);

// ab - ba. Throws std::invalid_argument on dimension mismatch.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Full binary tree describing a nested-commutator bracketing. Leaves are
// numbered 0..q-1 in left-to-right order.
struct CommTree {
  int leaf = -1;  // >= 0 for a leaf
  std::shared_ptr<CommTree> left, right;

  static std::shared_ptr<CommTree> make_leaf(int index);
  static std::shared_ptr<CommTree> make_node(std::shared_ptr<CommTree> l,
                                             std::shared_ptr<CommTree> r);
  int leaf_count() const;
};

// Right-comb bracketing [x1,[x2,[...,xq]]].
std::shared_ptr<CommTree> right_comb_tree(int leaves);

// All full binary trees with `leaves` leaves; Catalan(leaves-1) shapes.
std::vector<std::shared_ptr<CommTree>> enumerate_comm_trees(int leaves);

// Evaluates the bracketing described by the tree. Throws on arity mismatch
// or unequal dimensions.
ComplexMatrix nested_commutator(const CommTree& shape,
                                const std::vector<ComplexMatrix>& leaves);

// Matrix exponential, scaling-and-squaring with Pade approximants.
ComplexMatrix expm(const ComplexMatrix& m);

// Kronecker product, a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace maglab

#endif
