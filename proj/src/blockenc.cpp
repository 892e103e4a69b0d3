#include "maglab/blockenc.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "maglab/magnus.hpp"

namespace maglab {
namespace blockenc {

namespace {

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

int log2_exact(std::size_t v) {
  int m = 0;
  while ((std::size_t{1} << m) < v) ++m;
  return m;
}

}  // namespace

void RegisterLayout::add(const std::string& name, std::size_t d) {
  if (d < 1) throw std::invalid_argument("register dim must be >= 1");
  regs.push_back({name, d});
}

void RegisterLayout::finalize(std::size_t guard) {
  dim = 1;
  for (const auto& r : regs) {
    if (r.dim > guard || dim > guard / r.dim) {
      std::ostringstream os;
      os << "layout dimension exceeds " << guard << ": " << describe();
      throw LayoutError(os.str());
    }
    dim *= r.dim;
  }
  strides.assign(regs.size(), 1);
  for (std::size_t i = regs.size(); i-- > 0;)
    strides[i] = (i + 1 < regs.size()) ? strides[i + 1] * regs[i + 1].dim : 1;
}

std::size_t RegisterLayout::reg_index(const std::string& name) const {
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (regs[i].name == name) return i;
  throw std::invalid_argument("no register named " + name);
}

std::string RegisterLayout::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (i) os << " x ";
    os << regs[i].name << "(" << regs[i].dim << ")";
  }
  return os.str();
}

void InvolutionStage::apply(Eigen::VectorXcd& psi, bool) const {
  const RegisterLayout& lay = *layout_;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(lay.dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    const std::size_t j = map_(lay, idx);
    if (j > idx)
      std::swap(psi[static_cast<Eigen::Index>(idx)], psi[static_cast<Eigen::Index>(j)]);
  }
}

ControlledGateStage::ControlledGateStage(
    std::string name, LayoutPtr layout, std::vector<std::size_t> targets,
    std::vector<std::size_t> controls,
    std::function<const ComplexMatrix*(const std::vector<std::size_t>&)> pick)
    : name_(std::move(name)),
      layout_(std::move(layout)),
      targets_(std::move(targets)),
      controls_(std::move(controls)),
      pick_(std::move(pick)) {
  tdim_ = 1;
  for (auto t : targets_) tdim_ *= layout_->regs[t].dim;
  offsets_.assign(tdim_, 0);
  for (std::size_t combo = 0; combo < tdim_; ++combo) {
    std::size_t rem = combo, off = 0;
    for (std::size_t ti = targets_.size(); ti-- > 0;) {
      const std::size_t d = layout_->regs[targets_[ti]].dim;
      off += (rem % d) * layout_->strides[targets_[ti]];
      rem /= d;
    }
    offsets_[combo] = off;
  }
}

void ControlledGateStage::apply(Eigen::VectorXcd& psi, bool adjoint) const {
  const RegisterLayout& lay = *layout_;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(lay.dim);
#pragma omp parallel
  {
    std::vector<std::size_t> ctrl(controls_.size());
    Eigen::VectorXcd x(static_cast<Eigen::Index>(tdim_)), y;
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const std::size_t base = static_cast<std::size_t>(ii);
      bool is_base = true;
      for (auto t : targets_)
        if (lay.digit(base, t) != 0) {
          is_base = false;
          break;
        }
      if (!is_base) continue;
      for (std::size_t c = 0; c < controls_.size(); ++c)
        ctrl[c] = lay.digit(base, controls_[c]);
      const ComplexMatrix* g = pick_(ctrl);
      if (!g) continue;
      for (std::size_t t = 0; t < tdim_; ++t)
        x[static_cast<Eigen::Index>(t)] = psi[static_cast<Eigen::Index>(base + offsets_[t])];
      if (adjoint)
        y = g->adjoint() * x;
      else
        y = (*g) * x;
      for (std::size_t t = 0; t < tdim_; ++t)
        psi[static_cast<Eigen::Index>(base + offsets_[t])] = y[static_cast<Eigen::Index>(t)];
    }
  }
}

double ControlledGateStage::local_defect() const {
  double mx = 0.0;
  std::vector<std::size_t> ctrl(controls_.size(), 0);
  while (true) {
    const ComplexMatrix* g = pick_(ctrl);
    if (g) {
      ComplexMatrix d = g->adjoint() * (*g);
      d -= ComplexMatrix::Identity(d.rows(), d.cols());
      mx = std::max(mx, spectral_norm(d));
    }
    if (controls_.empty()) return mx;
    std::size_t pos = controls_.size();
    bool done = false;
    while (pos-- > 0) {
      if (++ctrl[pos] < layout_->regs[controls_[pos]].dim) break;
      ctrl[pos] = 0;
      if (pos == 0) done = true;
    }
    if (done) return mx;
  }
}

void CircuitOp::apply(Eigen::VectorXcd& psi, bool adjoint) const {
  if (!adjoint) {
    for (const auto& e : entries) e.stage->apply(psi, e.adjoint);
  } else {
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      it->stage->apply(psi, !it->adjoint);
  }
}

ComplexMatrix CircuitOp::to_dense(std::size_t cap) const {
  if (lay().dim > cap)
    throw LayoutError("to_dense: layout too large for dense materialization: " +
                      lay().describe());
  const Eigen::Index n = static_cast<Eigen::Index>(lay().dim);
  ComplexMatrix u(n, n);
  Eigen::VectorXcd psi(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    psi.setZero();
    psi[c] = 1.0;
    apply(psi);
    u.col(c) = psi;
  }
  return u;
}

double CircuitOp::stagewise_defect() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.stage->local_defect();
  return s;
}

double CircuitOp::dense_defect(std::size_t cap) const {
  if (lay().dim > cap) return -1.0;
  const ComplexMatrix u = to_dense(cap);
  const Eigen::Index n = u.rows();
  if (n <= 64) {
    ComplexMatrix d = u.adjoint() * u;
    d -= ComplexMatrix::Identity(n, n);
    return spectral_norm(d);
  }
  // power iteration on the Hermitian defect D = U+U - I, applied as matvecs
  Eigen::VectorXcd x(n);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x[i] = Complex(static_cast<double>(state >> 11) / 9.0e18 - 0.5,
                   static_cast<double>((state * 2862933555777941757ull) >> 11) / 9.0e18 - 0.5);
  }
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXcd y = u.adjoint() * (u * x) - x;
    const double nl = y.norm();
    if (nl < 1e-300) return nl;
    const double prev = lambda;
    lambda = nl;
    x = y / nl;
    if (it > 20 && std::abs(lambda - prev) < 1e-3 * lambda) break;
  }
  return lambda;
}

ComplexMatrix dilate_contraction(const ComplexMatrix& c) {
  if (c.rows() != c.cols())
    throw std::invalid_argument("dilate_contraction: non-square");
  const Eigen::Index d = c.rows();
  Eigen::JacobiSVD<ComplexMatrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s.size() > 0 && s(0) > 1.0 + 1e-12)
    throw std::invalid_argument("dilate_contraction: input norm exceeds 1");
  Eigen::VectorXd cosv = s.cwiseMin(1.0);
  Eigen::VectorXd sinv = (Eigen::VectorXd::Ones(d) - cosv.cwiseProduct(cosv))
                             .cwiseMax(0.0)
                             .cwiseSqrt();
  const ComplexMatrix u = svd.matrixU();
  const ComplexMatrix v = svd.matrixV();
  ComplexMatrix out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = u * cosv.asDiagonal() * v.adjoint();
  out.topRightCorner(d, d) = u * sinv.asDiagonal() * u.adjoint();
  out.bottomLeftCorner(d, d) = v * sinv.asDiagonal() * v.adjoint();
  out.bottomRightCorner(d, d) = -v * cosv.asDiagonal() * u.adjoint();
  return out;
}

std::vector<std::pair<int, int>> sorting_network(int k) {
  switch (k) {
    case 1:
      return {};
    case 2:
      return {{0, 1}};
    case 3:
      return {{0, 1}, {0, 2}, {1, 2}};
    case 4:
      return {{0, 1}, {2, 3}, {0, 2}, {1, 3}, {1, 2}};
    default:
      throw std::invalid_argument("sorting_network: k must be in 1..4");
  }
}

std::map<std::size_t, Permutation> record_decode_table(int k) {
  const auto net = sorting_network(k);
  std::map<std::size_t, Permutation> table;
  for (const auto& sigma : permutations_of(k)) {
    std::vector<int> v(static_cast<std::size_t>(k));
    for (int m = 0; m < k; ++m)
      v[static_cast<std::size_t>(m)] = k - sigma[static_cast<std::size_t>(m)];
    std::size_t record = 0;
    for (std::size_t c = 0; c < net.size(); ++c) {
      const auto [a, b] = net[c];
      if (v[static_cast<std::size_t>(a)] < v[static_cast<std::size_t>(b)]) {
        record |= std::size_t{1} << c;
        std::swap(v[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(b)]);
      }
    }
    for (int m = 0; m + 1 < k; ++m)
      if (v[static_cast<std::size_t>(m)] <= v[static_cast<std::size_t>(m + 1)])
        throw std::logic_error("sorting network failed to sort");
    if (!table.emplace(record, sigma).second)
      throw std::logic_error("sorting network records collide");
  }
  return table;
}

int coeff_flag_qubits(int k) {
  const BigInt f = factorial_big(k);
  int nb = 0;
  while ((BigInt(1) << nb) < f) ++nb;
  return nb;
}

Rational beta_k_exact(int k) {
  return Rational(factorial_big(k), BigInt(1) << coeff_flag_qubits(k));
}

double beta_k(int k) { return to_double(beta_k_exact(k)); }

namespace {

struct OmegaKRegs {
  std::size_t flag = 0, rec = 0, coeff = 0, sys = 0;
  std::vector<std::size_t> time, ham;
};

struct CtrlSpec {
  bool enabled = false;
  std::size_t reg = 0;
  std::size_t val = 0;
};

std::vector<CircuitOp::Entry> build_prep_stages(const LayoutPtr& lay,
                                                const OmegaKRegs& regs, int k, int M,
                                                const CtrlSpec& ctrl) {
  std::vector<CircuitOp::Entry> prep;
  auto hpool = std::make_shared<ComplexMatrix>([M] {
    // H^{(x) log2 M}: real symmetric, first column uniform
    ComplexMatrix h(1, 1);
    h(0, 0) = 1.0;
    ComplexMatrix h2(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h2 << s, s, s, -s;
    for (int m = 0; m < log2_exact(static_cast<std::size_t>(M)); ++m) h = kron(h, h2);
    return h;
  }());
  for (int l = 0; l < k; ++l) {
    std::vector<std::size_t> controls;
    if (ctrl.enabled) controls.push_back(ctrl.reg);
    const bool controlled = ctrl.enabled;
    const std::size_t want = ctrl.val;
    auto pick = [hpool, controlled, want](const std::vector<std::size_t>& c)
        -> const ComplexMatrix* {
      if (controlled && c[0] != want) return nullptr;
      return hpool.get();
    };
    prep.push_back({std::make_shared<ControlledGateStage>(
                        "uniform_time_" + std::to_string(l), lay,
                        std::vector<std::size_t>{regs.time[static_cast<std::size_t>(l)]},
                        controls, pick),
                    false});
  }
  const auto net = sorting_network(k);
  const bool has_ctrl = ctrl.enabled;
  const std::size_t creg = ctrl.reg, cval = ctrl.val;
  for (std::size_t c = 0; c < net.size(); ++c) {
    const auto [a, b] = net[c];
    const std::size_t ta = regs.time[static_cast<std::size_t>(a)];
    const std::size_t tb = regs.time[static_cast<std::size_t>(b)];
    const std::size_t bit = c;
    const std::size_t rec = regs.rec;
    prep.push_back({std::make_shared<InvolutionStage>(
                        "record_less_" + std::to_string(c), lay,
                        [ta, tb, bit, rec, has_ctrl, creg, cval](
                            const RegisterLayout& L, std::size_t idx) {
                          if (has_ctrl && L.digit(idx, creg) != cval) return idx;
                          if (L.digit(idx, ta) < L.digit(idx, tb)) {
                            const std::size_t dg = L.digit(idx, rec);
                            return idx + ((dg ^ (std::size_t{1} << bit)) - dg) * L.strides[rec];
                          }
                          return idx;
                        }),
                    false});
    prep.push_back({std::make_shared<InvolutionStage>(
                        "cswap_" + std::to_string(c), lay,
                        [ta, tb, bit, rec, has_ctrl, creg, cval](
                            const RegisterLayout& L, std::size_t idx) {
                          if (has_ctrl && L.digit(idx, creg) != cval) return idx;
                          if ((L.digit(idx, rec) >> bit) & 1) {
                            const std::ptrdiff_t va =
                                static_cast<std::ptrdiff_t>(L.digit(idx, ta));
                            const std::ptrdiff_t vb =
                                static_cast<std::ptrdiff_t>(L.digit(idx, tb));
                            return static_cast<std::size_t>(
                                static_cast<std::ptrdiff_t>(idx) +
                                (vb - va) * static_cast<std::ptrdiff_t>(L.strides[ta]) +
                                (va - vb) * static_cast<std::ptrdiff_t>(L.strides[tb]));
                          }
                          return idx;
                        }),
                    false});
  }
  for (int l = 0; l + 1 < k; ++l) {
    const std::size_t ta = regs.time[static_cast<std::size_t>(l)];
    const std::size_t tb = regs.time[static_cast<std::size_t>(l + 1)];
    const std::size_t bit = static_cast<std::size_t>(l);
    const std::size_t fl = regs.flag;
    prep.push_back({std::make_shared<InvolutionStage>(
                        "repeat_flag_" + std::to_string(l), lay,
                        [ta, tb, bit, fl, has_ctrl, creg, cval](const RegisterLayout& L,
                                                                std::size_t idx) {
                          if (has_ctrl && L.digit(idx, creg) != cval) return idx;
                          if (L.digit(idx, ta) == L.digit(idx, tb)) {
                            const std::size_t dg = L.digit(idx, fl);
                            return idx + ((dg ^ (std::size_t{1} << bit)) - dg) * L.strides[fl];
                          }
                          return idx;
                        }),
                    false});
  }
  return prep;
}

// Stages of the order-k block encoding appended to op.entries, optionally
// controlled on ctrl.reg == ctrl.val (the LCU selector). The coefficient
// amplitudes are coeff_scale * beta_k * C_{sigma,k}; the LCU combiner passes
// 1/(2 beta_k) so the per-term factor is unified to 1/2 by the same
// controlled rotation.
void append_omega_k_stages(CircuitOp& op, const OmegaKRegs& regs, int k, int M,
                           const HamiltonianModel& model, double t0, double h,
                           double alpha, const CtrlSpec& ctrl,
                           double coeff_scale = 1.0) {
  LayoutPtr lay = op.layout;

  const auto prep = build_prep_stages(lay, regs, k, M, ctrl);
  for (const auto& e : prep) op.entries.push_back(e);

  const auto table = record_decode_table(k);

  // --- coefficient oracle: rotations (coeff_scale beta_k C_{sigma,k}) on the
  // good branch, an X parking junk branches off |0> otherwise ---
  if (k >= 2) {
    const std::size_t nb_dim = lay->regs[regs.coeff].dim;
    auto pool = std::make_shared<std::vector<ComplexMatrix>>();
    ComplexMatrix xb = ComplexMatrix::Identity(static_cast<Eigen::Index>(nb_dim),
                                               static_cast<Eigen::Index>(nb_dim));
    xb(0, 0) = 0;
    xb(1, 1) = 0;
    xb(0, 1) = 1;
    xb(1, 0) = 1;
    pool->push_back(xb);
    const std::size_t rec_dim = lay->regs[regs.rec].dim;
    std::vector<int> rot_of_record(rec_dim, -1);
    const double bk = beta_k(k);
    for (const auto& [record, sigma] : table) {
      const double c = coeff_scale * bk * to_double(coeff_product(sigma, k));
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      ComplexMatrix g = ComplexMatrix::Identity(static_cast<Eigen::Index>(nb_dim),
                                                static_cast<Eigen::Index>(nb_dim));
      g(0, 0) = c;
      g(1, 1) = c;
      g(0, 1) = -s;
      g(1, 0) = s;
      rot_of_record[record] = static_cast<int>(pool->size());
      pool->push_back(g);
    }
    std::vector<std::size_t> controls;
    if (ctrl.enabled) controls.push_back(ctrl.reg);
    controls.push_back(regs.flag);
    controls.push_back(regs.rec);
    const bool controlled = ctrl.enabled;
    const std::size_t want = ctrl.val;
    auto pick = [pool, rot_of_record, controlled, want](
                    const std::vector<std::size_t>& c) -> const ComplexMatrix* {
      std::size_t i = 0;
      if (controlled) {
        if (c[0] != want) return nullptr;
        i = 1;
      }
      const std::size_t flag = c[i], record = c[i + 1];
      if (flag != 0) return &(*pool)[0];
      const int r = rot_of_record[record];
      if (r < 0) return nullptr;
      return &(*pool)[static_cast<std::size_t>(r)];
    };
    op.entries.push_back(
        {std::make_shared<ControlledGateStage>(
             "coeff_oracle", lay, std::vector<std::size_t>{regs.coeff}, controls, pick),
         false});
  } else if (coeff_scale != 1.0) {
    // k = 1 has a single unit coefficient; the unification factor still needs
    // its rotation on the coefficient register.
    const std::size_t nb_dim = lay->regs[regs.coeff].dim;
    const double c = coeff_scale;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    auto g = std::make_shared<ComplexMatrix>(
        ComplexMatrix::Identity(static_cast<Eigen::Index>(nb_dim),
                                static_cast<Eigen::Index>(nb_dim)));
    (*g)(0, 0) = c;
    (*g)(1, 1) = c;
    (*g)(0, 1) = -s;
    (*g)(1, 0) = s;
    std::vector<std::size_t> controls;
    if (ctrl.enabled) controls.push_back(ctrl.reg);
    const bool controlled = ctrl.enabled;
    const std::size_t want = ctrl.val;
    auto pick = [g, controlled, want](const std::vector<std::size_t>& c2)
        -> const ComplexMatrix* {
      if (controlled && c2[0] != want) return nullptr;
      return g.get();
    };
    op.entries.push_back(
        {std::make_shared<ControlledGateStage>(
             "coeff_oracle", lay, std::vector<std::size_t>{regs.coeff}, controls, pick),
         false});
  }

  // --- SELECT: passes of SWAP-UP / controlled HAM-T / SWAP-UP; pass l picks
  // the slot holding the sigma(l)-th largest index. Passes are applied last
  // position first so the assembled product reads left-to-right. ---
  {
    auto dil = std::make_shared<std::vector<ComplexMatrix>>();
    const double delta = h / M;
    for (int i = 0; i < M; ++i)
      dil->push_back(dilate_contraction(a_eval(model, t0 + i * delta) / alpha));

    const std::size_t rec_dim = lay->regs[regs.rec].dim;
    const bool has_ctrl = ctrl.enabled;
    const std::size_t creg = ctrl.reg, cval = ctrl.val;
    for (int pass = k; pass >= 1; --pass) {
      std::shared_ptr<InvolutionStage> swap_stage;
      if (k >= 2) {
        auto sel_of_record = std::make_shared<std::vector<int>>(rec_dim, 0);
        for (const auto& [record, sigma] : table)
          (*sel_of_record)[record] = sigma[static_cast<std::size_t>(pass - 1)] - 1;
        const auto times = regs.time;
        const std::size_t rec = regs.rec;
        swap_stage = std::make_shared<InvolutionStage>(
            "swap_up_pass_" + std::to_string(pass), lay,
            [sel_of_record, times, rec, has_ctrl, creg, cval](const RegisterLayout& L,
                                                              std::size_t idx) {
              if (has_ctrl && L.digit(idx, creg) != cval) return idx;
              const int sel = (*sel_of_record)[L.digit(idx, rec)];
              if (sel == 0) return idx;
              const std::size_t t0reg = times[0];
              const std::size_t ts = times[static_cast<std::size_t>(sel)];
              const std::ptrdiff_t va = static_cast<std::ptrdiff_t>(L.digit(idx, t0reg));
              const std::ptrdiff_t vb = static_cast<std::ptrdiff_t>(L.digit(idx, ts));
              return static_cast<std::size_t>(
                  static_cast<std::ptrdiff_t>(idx) +
                  (vb - va) * static_cast<std::ptrdiff_t>(L.strides[t0reg]) +
                  (va - vb) * static_cast<std::ptrdiff_t>(L.strides[ts]));
            });
        op.entries.push_back({swap_stage, false});
      }
      std::vector<std::size_t> controls;
      if (ctrl.enabled) controls.push_back(ctrl.reg);
      controls.push_back(regs.time[0]);
      const bool controlled = ctrl.enabled;
      const std::size_t want = ctrl.val;
      auto pick = [dil, controlled, want](const std::vector<std::size_t>& c)
          -> const ComplexMatrix* {
        std::size_t i = 0;
        if (controlled) {
          if (c[0] != want) return nullptr;
          i = 1;
        }
        return &(*dil)[c[i]];
      };
      op.entries.push_back(
          {std::make_shared<ControlledGateStage>(
               "ham_t_pass_" + std::to_string(pass), lay,
               std::vector<std::size_t>{regs.ham[static_cast<std::size_t>(pass - 1)],
                                        regs.sys},
               controls, pick),
           false});
      if (swap_stage) op.entries.push_back({swap_stage, false});
    }
  }

  // --- adjoint PREP_k^t ---
  for (auto it = prep.rbegin(); it != prep.rend(); ++it)
    op.entries.push_back({it->stage, true});
}

CircuitOp build_omega_k_op(const HamiltonianModel& model, int j, double h, int k,
                           int M, double alpha, bool select_only) {
  if (k < 1 || k > 4)
    throw std::invalid_argument("block_encode_omega_k: k must be in 1..4");
  if (k > M) throw std::invalid_argument("block_encode_omega_k: k <= M required");
  if (!is_pow2(static_cast<std::size_t>(M)))
    throw std::invalid_argument("block_encode_omega_k: M must be a power of 2");
  if (!(alpha > 0)) throw std::invalid_argument("block_encode_omega_k: alpha > 0");

  CircuitOp op;
  op.layout->add("flag", std::size_t{1} << k);
  for (int l = 0; l < k; ++l)
    op.layout->add("time" + std::to_string(l), static_cast<std::size_t>(M));
  op.layout->add("perm_record", std::size_t{1} << sorting_network(k).size());
  op.layout->add("coeff_flag",
                 k >= 2 ? (std::size_t{1} << coeff_flag_qubits(k)) : 1);
  for (int l = 0; l < k; ++l) op.layout->add("ham_ancilla" + std::to_string(l), 2);
  op.layout->add("system", static_cast<std::size_t>(model.dim()));
  op.layout->finalize();

  OmegaKRegs regs;
  regs.flag = 0;
  for (int l = 0; l < k; ++l) regs.time.push_back(1 + static_cast<std::size_t>(l));
  regs.rec = 1 + static_cast<std::size_t>(k);
  regs.coeff = 2 + static_cast<std::size_t>(k);
  for (int l = 0; l < k; ++l) regs.ham.push_back(3 + static_cast<std::size_t>(k + l));
  regs.sys = 3 + 2 * static_cast<std::size_t>(k);

  CtrlSpec ctrl;  // uncontrolled
  if (select_only) {
    CircuitOp tmp;
    tmp.layout = op.layout;
    append_omega_k_stages(tmp, regs, k, M, model, j * h, h, alpha, ctrl);
    for (const auto& e : tmp.entries) {
      const std::string n = e.stage->name();
      if (n.rfind("swap_up_pass_", 0) == 0 || n.rfind("ham_t_pass_", 0) == 0)
        op.entries.push_back(e);
    }
    return op;
  }
  append_omega_k_stages(op, regs, k, M, model, j * h, h, alpha, ctrl);
  return op;
}

}  // namespace

BlockEncoding ham_t(const HamiltonianModel& model, int j, double h, int M,
                    double alpha) {
  if (M < 1) throw std::invalid_argument("ham_t: M must be >= 1");
  if (!(alpha > 0)) throw std::invalid_argument("ham_t: alpha must be > 0");
  const double delta = h / M;
  auto pool = std::make_shared<std::vector<ComplexMatrix>>();
  for (int i = 0; i < M; ++i) {
    const ComplexMatrix hm = ham_eval(model, j * h + i * delta);
    if (spectral_norm(hm) > alpha + 1e-12)
      throw std::invalid_argument("ham_t: alpha too small for snapshot norms");
    pool->push_back(dilate_contraction(hm / alpha));
  }
  BlockEncoding be;
  be.op.layout->add("time", static_cast<std::size_t>(M));
  be.op.layout->add("ham_ancilla", 2);
  be.op.layout->add("system", static_cast<std::size_t>(model.dim()));
  be.op.layout->finalize();
  auto pick = [pool](const std::vector<std::size_t>& c) -> const ComplexMatrix* {
    return &(*pool)[c[0]];
  };
  be.op.entries.push_back(
      {std::make_shared<ControlledGateStage>("ham_t", be.op.layout,
                                             std::vector<std::size_t>{1, 2},
                                             std::vector<std::size_t>{0}, pick),
       false});
  be.sub = alpha;
  be.signal_regs = {0, 2};
  be.flagged_projector = "ham_ancilla in |0>";
  be.k = 0;
  be.M = M;
  be.t0 = j * h;
  be.h = h;
  be.alpha = alpha;
  return be;
}

PreparedState prep_time_ordered(int k, int M) {
  if (k < 2 || k > 4)
    throw std::invalid_argument("prep_time_ordered: k must be in 2..4");
  if (k > M) throw std::invalid_argument("prep_time_ordered: k <= M required");
  if (!is_pow2(static_cast<std::size_t>(M)))
    throw std::invalid_argument("prep_time_ordered: M must be a power of 2");

  CircuitOp op;
  op.layout->add("flag", std::size_t{1} << k);
  for (int l = 0; l < k; ++l)
    op.layout->add("time" + std::to_string(l), static_cast<std::size_t>(M));
  op.layout->add("perm_record", std::size_t{1} << sorting_network(k).size());
  op.layout->finalize();

  OmegaKRegs regs;
  regs.flag = 0;
  for (int l = 0; l < k; ++l) regs.time.push_back(1 + static_cast<std::size_t>(l));
  regs.rec = 1 + static_cast<std::size_t>(k);

  const auto prep = build_prep_stages(op.layout, regs, k, M, CtrlSpec{});
  op.entries = prep;

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.lay().dim));
  psi[0] = 1.0;
  op.apply(psi);

  PreparedState st;
  st.layout = op.layout;
  st.vector = psi;
  st.good_flag = "flag register in |0> (no repeated time indices)";

  // structural count of flagged components, checked in exact arithmetic
  const double amp = std::pow(static_cast<double>(M), -0.5 * k);
  long count = 0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (op.lay().digit(static_cast<std::size_t>(i), 0) != 0) continue;
    const double a = std::abs(psi[i]);
    if (a > 0.5 * amp) {
      if (std::abs(a - amp) > 1e-13)
        throw std::logic_error("prep_time_ordered: non-uniform flagged amplitude");
      ++count;
    }
  }
  const BigInt expected = factorial_big(k) * binomial_big(M, k);
  if (BigInt(count) != expected)
    throw std::logic_error("prep_time_ordered: flagged component count mismatch");
  BigInt mk = 1;
  for (int i = 0; i < k; ++i) mk *= M;
  const Rational gm(expected, mk);
  st.good_mass = to_double(gm);
  std::ostringstream os;
  os << boost::multiprecision::numerator(gm) << "/"
     << boost::multiprecision::denominator(gm);
  st.good_mass_exact = os.str();
  return st;
}

PreparedState prep_coeffs(int k) {
  if (k < 2 || k > 4) throw std::invalid_argument("prep_coeffs: k must be in 2..4");
  const int nb = coeff_flag_qubits(k);
  const auto perms = permutations_of(k);
  std::size_t pdim = 1;
  while (pdim < perms.size()) pdim <<= 1;

  PreparedState st;
  st.layout = std::make_shared<RegisterLayout>();
  st.layout->add("coeff_flag", std::size_t{1} << nb);
  st.layout->add("perm_coeff", pdim);
  st.layout->finalize();
  st.vector = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(st.layout->dim));

  const double bk = beta_k(k);
  const double inv_sqrt_fact = 1.0 / std::sqrt(static_cast<double>(perms.size()));
  Rational mass = 0;
  const Rational bk_exact = beta_k_exact(k);
  for (std::size_t q = 0; q < perms.size(); ++q) {
    const Rational c_exact = coeff_product(perms[q], k);
    const double c = bk * to_double(c_exact);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    st.vector[static_cast<Eigen::Index>(q)] = inv_sqrt_fact * c;         // coeff_flag = 0
    st.vector[static_cast<Eigen::Index>(pdim + q)] = inv_sqrt_fact * s;  // coeff_flag = 1
    mass += bk_exact * bk_exact * c_exact * c_exact;
  }
  mass /= Rational(factorial_big(k));
  st.good_flag = "coeff_flag in |0>, perm_coeff < k!";
  st.good_mass = to_double(mass);
  std::ostringstream os;
  os << boost::multiprecision::numerator(mass) << "/"
     << boost::multiprecision::denominator(mass);
  st.good_mass_exact = os.str();
  return st;
}

ComplexMatrix swap_up(int k, int M, int sel) {
  if (sel < 0 || sel >= k) throw std::invalid_argument("swap_up: sel out of range");
  if (M < 1) throw std::invalid_argument("swap_up: M must be >= 1");
  double dimd = 1;
  for (int i = 0; i < k; ++i) dimd *= M;
  if (dimd > static_cast<double>(kDenseGuard) * 2)
    throw LayoutError("swap_up: dense dimension too large");
  const std::size_t dim = static_cast<std::size_t>(dimd);
  ComplexMatrix p = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                        static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> stride(static_cast<std::size_t>(k), 1);
  for (int i = k - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(M);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const std::ptrdiff_t v0 =
        static_cast<std::ptrdiff_t>(idx / stride[0] % static_cast<std::size_t>(M));
    const std::ptrdiff_t vs = static_cast<std::ptrdiff_t>(
        idx / stride[static_cast<std::size_t>(sel)] % static_cast<std::size_t>(M));
    const std::size_t out = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(idx) +
        (vs - v0) * static_cast<std::ptrdiff_t>(stride[0]) +
        (v0 - vs) * static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(sel)]));
    p(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(idx)) = 1.0;
  }
  return p;
}

ComplexMatrix select_magnus(const HamiltonianModel& model, int j, double h, int k,
                            int M, double alpha) {
  CircuitOp op = build_omega_k_op(model, j, h, k, M, alpha, true);
  return op.to_dense();
}

BlockEncoding block_encode_omega_k(const HamiltonianModel& model, int j, double h,
                                   int k, int M, double alpha) {
  BlockEncoding be;
  be.op = build_omega_k_op(model, j, h, k, M, alpha, false);
  double sub = 1.0;
  for (int i = 0; i < k; ++i) sub *= alpha * h;
  be.sub = sub / beta_k(k);
  be.err = 0.0;
  be.signal_regs = {be.op.lay().reg_index("system")};
  be.flagged_projector = "all non-system registers in |0...0>";
  be.k = k;
  be.M = M;
  be.t0 = j * h;
  be.h = h;
  be.alpha = alpha;
  return be;
}

BlockEncoding lcu_combine(const std::vector<BlockEncoding>& encodings,
                          const HamiltonianModel& model, double alpha, double h) {
  const int p = static_cast<int>(encodings.size());
  if (p < 1 || p > 6) throw std::invalid_argument("lcu_combine: need 1..6 encodings");
  if (!(alpha * h < 1.0))
    throw std::domain_error("lcu_combine: alpha*h >= 1 is infeasible");
  const int M = encodings[0].M;
  for (int k = 1; k <= p; ++k) {
    const auto& e = encodings[static_cast<std::size_t>(k - 1)];
    if (e.k != k || e.M != M || std::abs(e.h - h) > 1e-15 ||
        std::abs(e.alpha - alpha) > 1e-15 ||
        std::abs(e.t0 - encodings[0].t0) > 1e-15)
      throw std::invalid_argument(
          "lcu_combine: encodings must be k=1..p with matching parameters");
  }
  const double t0 = encodings[0].t0;

  CircuitOp op;
  std::size_t sel_dim = 1;
  while (sel_dim < static_cast<std::size_t>(p)) sel_dim <<= 1;
  op.layout->add("lcu_select", sel_dim);
  // flag bits needed by branch k are k-1 <= p-1
  op.layout->add("flag", std::size_t{1} << std::max(p - 1, 1));
  for (int l = 0; l < p; ++l)
    op.layout->add("time" + std::to_string(l), static_cast<std::size_t>(M));
  op.layout->add("perm_record",
                 std::size_t{1} << (p >= 2 ? sorting_network(p).size() : 0));
  // the unification rotation needs at least one coefficient qubit
  op.layout->add("coeff_flag",
                 std::max<std::size_t>(2, p >= 2 ? (std::size_t{1} << coeff_flag_qubits(p)) : 2));
  for (int l = 0; l < p; ++l) op.layout->add("ham_ancilla" + std::to_string(l), 2);
  op.layout->add("system", static_cast<std::size_t>(model.dim()));
  op.layout->finalize();

  // LCU weights sqrt(alpha^k h^k / Sigma)
  double sigma = 0.0, ahk = 1.0;
  std::vector<double> w(static_cast<std::size_t>(p));
  for (int k = 1; k <= p; ++k) {
    ahk *= alpha * h;
    w[static_cast<std::size_t>(k - 1)] = ahk;
    sigma += ahk;
  }
  Eigen::VectorXd col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sel_dim));
  for (int k = 1; k <= p; ++k)
    col[k - 1] = std::sqrt(w[static_cast<std::size_t>(k - 1)] / sigma);
  // Householder reflection mapping e_0 to the weight column
  auto prep_gate = std::make_shared<ComplexMatrix>([&col, sel_dim] {
    Eigen::VectorXd u = -col;
    u(0) += 1.0;
    const double nu = u.squaredNorm();
    ComplexMatrix g = ComplexMatrix::Identity(static_cast<Eigen::Index>(sel_dim),
                                              static_cast<Eigen::Index>(sel_dim));
    if (nu > 1e-28) g -= (2.0 / nu) * (u * u.transpose()).cast<Complex>();
    return g;
  }());
  auto prep_pick = [prep_gate](const std::vector<std::size_t>&) -> const ComplexMatrix* {
    return prep_gate.get();
  };
  auto prep_stage = std::make_shared<ControlledGateStage>(
      "lcu_prep", op.layout, std::vector<std::size_t>{0}, std::vector<std::size_t>{},
      prep_pick);
  op.entries.push_back({prep_stage, false});

  for (int k = 1; k <= p; ++k) {
    OmegaKRegs regs;
    regs.flag = 1;
    for (int l = 0; l < k; ++l) regs.time.push_back(2 + static_cast<std::size_t>(l));
    regs.rec = 2 + static_cast<std::size_t>(p);
    regs.coeff = 3 + static_cast<std::size_t>(p);
    for (int l = 0; l < k; ++l)
      regs.ham.push_back(4 + static_cast<std::size_t>(p + l));
    regs.sys = 4 + 2 * static_cast<std::size_t>(p);
    CtrlSpec ctrl;
    ctrl.enabled = true;
    ctrl.reg = 0;
    ctrl.val = static_cast<std::size_t>(k - 1);
    // unifies the per-term factor beta_k to 1/2 inside the coefficient oracle
    append_omega_k_stages(op, regs, k, M, model, t0, h, alpha, ctrl,
                          1.0 / (2.0 * beta_k(k)));
  }
  op.entries.push_back({prep_stage, true});

  BlockEncoding be;
  be.op = std::move(op);
  double cg = 0.0, ahp = 1.0;
  for (int i = 0; i < p; ++i) {
    cg += ahp;
    ahp *= alpha * h;
  }
  be.sub = 2.0 * cg * alpha * h;
  be.err = 0.0;
  be.signal_regs = {be.op.lay().reg_index("system")};
  be.flagged_projector = "all non-system registers in |0...0>";
  be.k = -p;  // marks a combined encoding of order p
  be.M = M;
  be.t0 = t0;
  be.h = h;
  be.alpha = alpha;
  return be;
}

ComplexMatrix extract_block(const BlockEncoding& be) {
  const auto& lay = be.op.lay();
  std::size_t sdim = 1;
  for (auto r : be.signal_regs) sdim *= lay.regs[r].dim;

  auto signal_index = [&](std::size_t combo) {
    std::size_t rem = combo, idx = 0;
    for (std::size_t si = be.signal_regs.size(); si-- > 0;) {
      const std::size_t r = be.signal_regs[si];
      idx += (rem % lay.regs[r].dim) * lay.strides[r];
      rem /= lay.regs[r].dim;
    }
    return idx;
  };

  ComplexMatrix block(static_cast<Eigen::Index>(sdim), static_cast<Eigen::Index>(sdim));
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(lay.dim));
  for (std::size_t s = 0; s < sdim; ++s) {
    psi.setZero();
    psi[static_cast<Eigen::Index>(signal_index(s))] = 1.0;
    be.op.apply(psi);
    for (std::size_t r = 0; r < sdim; ++r)
      block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) =
          psi[static_cast<Eigen::Index>(signal_index(r))];
  }
  return block;
}

ComplexMatrix exp_of_block(const BlockEncoding& be) {
  ComplexMatrix e = extract_block(be);
  const double defect = spectral_norm(ComplexMatrix(e + e.adjoint()));
  if (defect > 1e-8)
    throw std::domain_error("exp_of_block: extracted block not anti-Hermitian");
  return expm(be.sub * e);
}

}  // namespace blockenc
}  // namespace maglab
