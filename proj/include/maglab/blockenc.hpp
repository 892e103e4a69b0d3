#ifndef MAGLAB_BLOCKENC_HPP
#define MAGLAB_BLOCKENC_HPP

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "maglab/combinatorics.hpp"
#include "maglab/hamiltonian.hpp"

namespace maglab {
namespace blockenc {

// Total dimension guard for assembled circuit layouts.
constexpr std::size_t kDimGuard = std::size_t{1} << 20;
// Dense materialization guard (to_dense / dense unitarity checks).
constexpr std::size_t kDenseGuard = std::size_t{1} << 11;

struct LayoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mixed-radix register space; register 0 is the most significant digit.
struct RegisterLayout {
  struct Reg {
    std::string name;
    std::size_t dim;
  };
  std::vector<Reg> regs;
  std::vector<std::size_t> strides;
  std::size_t dim = 1;

  void add(const std::string& name, std::size_t d);
  void finalize(std::size_t guard = kDimGuard);
  std::size_t digit(std::size_t idx, std::size_t r) const {
    return idx / strides[r] % regs[r].dim;
  }
  std::size_t reg_index(const std::string& name) const;
  std::string describe() const;
};

using LayoutPtr = std::shared_ptr<const RegisterLayout>;

class Stage {
 public:
  virtual ~Stage() = default;
  virtual void apply(Eigen::VectorXcd& psi, bool adjoint) const = 0;
  // exact unitarity defect on the registers the stage touches
  virtual double local_defect() const = 0;
  virtual std::string name() const = 0;
};

// Basis permutation that is its own inverse.
class InvolutionStage : public Stage {
 public:
  InvolutionStage(std::string name, LayoutPtr layout,
                  std::function<std::size_t(const RegisterLayout&, std::size_t)> map)
      : name_(std::move(name)), layout_(std::move(layout)), map_(std::move(map)) {}
  void apply(Eigen::VectorXcd& psi, bool adjoint) const override;
  double local_defect() const override { return 0.0; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  LayoutPtr layout_;
  std::function<std::size_t(const RegisterLayout&, std::size_t)> map_;
};

// Small unitary on the joint space of `targets`, selected by the digits of
// `controls`; a nullptr gate means identity for that control value.
class ControlledGateStage : public Stage {
 public:
  ControlledGateStage(std::string name, LayoutPtr layout,
                      std::vector<std::size_t> targets,
                      std::vector<std::size_t> controls,
                      std::function<const ComplexMatrix*(const std::vector<std::size_t>&)> pick);
  void apply(Eigen::VectorXcd& psi, bool adjoint) const override;
  double local_defect() const override;
  std::string name() const override { return name_; }

 private:
  std::string name_;
  LayoutPtr layout_;
  std::vector<std::size_t> targets_, controls_;
  std::function<const ComplexMatrix*(const std::vector<std::size_t>&)> pick_;
  std::vector<std::size_t> offsets_;  // index offsets of the target combos
  std::size_t tdim_ = 1;
};

struct CircuitOp {
  std::shared_ptr<RegisterLayout> layout = std::make_shared<RegisterLayout>();
  struct Entry {
    std::shared_ptr<const Stage> stage;
    bool adjoint = false;
  };
  std::vector<Entry> entries;

  const RegisterLayout& lay() const { return *layout; }
  void apply(Eigen::VectorXcd& psi, bool adjoint = false) const;
  ComplexMatrix to_dense(std::size_t cap = kDenseGuard) const;
  // Sum of exact per-stage defects; bounds the composite defect.
  double stagewise_defect() const;
  // Dense-matrix defect, or -1 when the layout exceeds `cap`.
  double dense_defect(std::size_t cap = kDenseGuard) const;
};

struct BlockEncoding {
  CircuitOp op;
  double sub = 1.0;   // subnormalization
  double err = 0.0;   // emulation loads coefficients exactly
  std::vector<std::size_t> signal_regs;  // non-projected registers
  std::string flagged_projector;
  // construction parameters, used for combiner validation
  int k = 0;
  int M = 0;
  double t0 = 0.0, h = 0.0, alpha = 1.0;
};

struct PreparedState {
  std::shared_ptr<RegisterLayout> layout;
  Eigen::VectorXcd vector;
  std::string good_flag;
  double good_mass = 0.0;
  // exact rational value of the good mass as "num/den"
  std::string good_mass_exact;
};

// [[c, sqrt(I-cc+)],[sqrt(I-c+c), -c+]] via SVD; top-left block is c.
ComplexMatrix dilate_contraction(const ComplexMatrix& c);

// Time-indexed selector of Hamiltonian snapshots H(jh + i h/M)/alpha,
// block diagonal over the time register, one dilation ancilla qubit.
BlockEncoding ham_t(const HamiltonianModel& model, int j, double h, int M,
                    double alpha);

// Hadamard-uniform tuples, compare-and-swap sort recording comparator
// outcomes, repeat flags from post-sort adjacent equality.
PreparedState prep_time_ordered(int k, int M);

// Amplitudes beta_k C_{pi,k} / sqrt(k!) on the coefficient-flagged branch.
PreparedState prep_coeffs(int k);

Rational beta_k_exact(int k);
double beta_k(int k);
int coeff_flag_qubits(int k);  // n_b = ceil(log2 k!)

// Permutation matrix on the time-register tower swapping slot 0 with `sel`.
ComplexMatrix swap_up(int k, int M, int sel);

// Net SELECT unitary (SWAP-UP / controlled HAM-T passes) on the full layout,
// densely materialized; small layouts only.
ComplexMatrix select_magnus(const HamiltonianModel& model, int j, double h, int k,
                            int M, double alpha);

// PREP_k^t, coefficient oracle, SELECT, adjoint preps, assembled so that
// extract_block(...) * sub == omega_k_quadrature with sub = alpha^k h^k / beta_k.
BlockEncoding block_encode_omega_k(const HamiltonianModel& model, int j, double h,
                                   int k, int M, double alpha);

// LCU combination over k = 1..p with sub = 2 C^gamma_(p) alpha h; the
// beta_k factors are unified to 1/2 by controlled rotations.
BlockEncoding lcu_combine(const std::vector<BlockEncoding>& encodings,
                          const HamiltonianModel& model, double alpha, double h);

// The signal-space block <flag|U|flag>.
ComplexMatrix extract_block(const BlockEncoding& be);

// expm(sub * extract_block); requires the block anti-Hermitian to 1e-8.
ComplexMatrix exp_of_block(const BlockEncoding& be);

// Comparator network sorting k values descending; pairs (a,b) enforce
// slot a >= slot b.
std::vector<std::pair<int, int>> sorting_network(int k);

// record bitmask -> input arrangement sigma (one-line, 1-based), built by
// running the network on every arrangement of k distinct values.
std::map<std::size_t, Permutation> record_decode_table(int k);

}  // namespace blockenc
}  // namespace maglab

#endif
