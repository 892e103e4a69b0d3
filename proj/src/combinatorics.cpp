#include "maglab/combinatorics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace maglab {

double to_double(const Rational& r) { return r.convert_to<double>(); }

BigInt factorial_big(int n) {
  if (n < 0) throw std::invalid_argument("factorial of negative");
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

BigInt binomial_big(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= (n + 1 - i);
    r /= i;
  }
  return r;
}

std::uint64_t binomial_u64(int n, int k) {
  return binomial_big(n, k).convert_to<std::uint64_t>();
}

BigInt catalan_big(int n) {
  if (n < 0) throw std::invalid_argument("catalan of negative");
  return binomial_big(2 * n, n) / (n + 1);
}

Rational bernoulli(int n) {
  if (n < 0) throw std::invalid_argument("bernoulli: n must be >= 0");
  if (n > 64) throw std::invalid_argument("bernoulli: n > 64 not supported");
  static std::vector<Rational> cache{Rational(1)};
  // B_k = -1/(k+1) * sum_{m<k} C(k+1,m) B_m, which yields B_1 = -1/2.
  while (static_cast<int>(cache.size()) <= n) {
    const int k = static_cast<int>(cache.size());
    Rational s = 0;
    for (int m = 0; m < k; ++m) s += Rational(binomial_big(k + 1, m)) * cache[m];
    cache.push_back(-s / (k + 1));
  }
  return cache[static_cast<std::size_t>(n)];
}

int descents(const Permutation& p) {
  int d = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (p[i] > p[i + 1]) ++d;
  return d;
}

int ascents(const Permutation& p) {
  return static_cast<int>(p.size()) - 1 - descents(p);
}

std::vector<Permutation> permutations_of(int k) {
  if (k < 1) throw std::invalid_argument("permutations_of: k must be >= 1");
  Permutation p(static_cast<std::size_t>(k));
  std::iota(p.begin(), p.end(), 1);
  std::vector<Permutation> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

namespace {

void check_perm(const Permutation& p, int k, const char* who) {
  if (static_cast<int>(p.size()) != k)
    throw std::invalid_argument(std::string(who) + ": permutation size mismatch");
}

}  // namespace

Rational coeff_product(const Permutation& p, int k, DescentConvention conv) {
  check_perm(p, k, "coeff_product");
  const int d = conv == DescentConvention::Paper ? descents(p) : ascents(p);
  Rational c = Rational(1) / (Rational(k) * Rational(binomial_big(k - 1, d)));
  return (d % 2 == 0) ? c : -c;
}

Rational coeff_commutator(const Permutation& p, int n, DescentConvention conv) {
  check_perm(p, n, "coeff_commutator");
  int da = ascents(p), db = descents(p);
  if (conv == DescentConvention::Flipped) std::swap(da, db);
  Rational c = Rational(factorial_big(da) * factorial_big(db)) /
               Rational(BigInt(n) * factorial_big(n));
  return (db % 2 == 0) ? c : -c;
}

void ordered_tuples(int M, int k,
                    const std::function<void(const std::vector<int>&)>& visit) {
  if (k < 1) throw std::invalid_argument("ordered_tuples: k must be >= 1");
  if (M < 0) throw std::invalid_argument("ordered_tuples: M must be >= 0");
  if (k > M) return;  // empty by convention
  std::vector<int> t(static_cast<std::size_t>(k));
  // lexicographic in (i_1, ..., i_k); i_j > i_{j+1}
  std::function<void(int, int)> rec = [&](int depth, int lo) {
    // t[depth] ranges over values that leave room for k-1-depth smaller ones
    for (int v = k - 1 - depth; v <= lo; ++v) {
      t[static_cast<std::size_t>(depth)] = v;
      if (depth + 1 == k) {
        visit(t);
      } else {
        rec(depth + 1, v - 1);
      }
    }
  };
  // i_1 ascends from k-1 to M-1; deeper entries ascend below their parent.
  rec(0, M - 1);
}

std::vector<std::vector<int>> ordered_tuples_list(int M, int k) {
  std::vector<std::vector<int>> out;
  ordered_tuples(M, k, [&](const std::vector<int>& t) { out.push_back(t); });
  return out;
}

}  // namespace maglab
