#ifndef MAGLAB_COMBINATORICS_HPP
#define MAGLAB_COMBINATORICS_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <vector>

namespace maglab {

using BigInt = boost::multiprecision::cpp_int;
// Exact rational, always reduced with positive denominator.
using Rational = boost::multiprecision::cpp_rational;

double to_double(const Rational& r);

BigInt factorial_big(int n);
BigInt binomial_big(int n, int k);
std::uint64_t binomial_u64(int n, int k);
BigInt catalan_big(int n);

// Bernoulli number with the B_1 = -1/2 convention, exact. n <= 64.
Rational bernoulli(int n);

// A permutation is its one-line image on {1..k}.
using Permutation = std::vector<int>;

// |{i : pi(i) > pi(i+1)}|
int descents(const Permutation& p);
int ascents(const Permutation& p);

// All of S_k in lexicographic order.
std::vector<Permutation> permutations_of(int k);

// The descent-convention switch exists for forensic use only; the paper's
// two coefficient formulas use clashing symbols and the cross-representation
// identity test arbitrates. Default `Paper`.
enum class DescentConvention { Paper, Flipped };

// Weight of the ordered product A(t_{pi(1)})...A(t_{pi(k)}) in Omega_k:
// (-1)^d / (k * C(k-1, d)) with d the number of descents.
Rational coeff_product(const Permutation& p, int k,
                       DescentConvention conv = DescentConvention::Paper);

// Weight of the right-nested commutator [A(t_{pi(1)}),[...,A(t_{pi(n)})]]:
// (1/n) (-1)^{d_b} d_a! d_b! / n! with d_a ascents and d_b descents.
Rational coeff_commutator(const Permutation& p, int n,
                          DescentConvention conv = DescentConvention::Paper);

// Strictly decreasing k-tuples in {0..M-1}, visited in lexicographic order
// of (i_1,...,i_k); exactly C(M,k) of them (none when k > M).
void ordered_tuples(int M, int k, const std::function<void(const std::vector<int>&)>& visit);
std::vector<std::vector<int>> ordered_tuples_list(int M, int k);

}  // namespace maglab

#endif
