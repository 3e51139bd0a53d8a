#ifndef PAA_WELFARE_HPP
#define PAA_WELFARE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "paa/rng.hpp"

namespace paa {

// Exponents with |q| at or above this magnitude are evaluated as the min/max
// welfare rules; finite power means degenerate numerically long before it.
constexpr double kInfiniteQThreshold = 1e6;

inline bool is_neg_inf_q(double q) { return q <= -kInfiniteQThreshold; }
inline bool is_pos_inf_q(double q) { return q >= kInfiniteQThreshold; }
inline bool is_finite_q(double q) { return !is_neg_inf_q(q) && !is_pos_inf_q(q); }

// Aggregation rule: power-mean exponent q (extended real) and the utility
// scale [u_min, u_max] every individual reports within.
struct WelfareConfig {
    double q = 1.0;
    double u_min = 0.0;
    double u_max = 1.0;

    double delta_u() const { return u_max - u_min; }

    // u_min <= u_max, both finite; q < 1 requires u_min > 0 (logs and negative
    // powers blow up at zero).
    void validate() const;
};

// Size-n subset of society {0..N-1}, kept sorted.
struct AssessorSet {
    std::vector<int> indices;
    int society_size = 0;

    int size() const { return static_cast<int>(indices.size()); }
};

// Power-mean social welfare of a utility profile:
//   q = -inf  -> min,  q = 0 -> geometric mean,  q = +inf -> max,
//   q in R*   -> (mean(u^q))^(1/q).
// Finite q is evaluated in factored form (u_max-anchored for q > 0,
// u_min-anchored for q < 0) so large |q| neither overflows nor underflows.
// Throws on an empty profile, a nonpositive entry with q < 1, or an entry
// outside [u_min, u_max].
double power_mean(Eigen::Ref<const Eigen::VectorXd> values, const WelfareConfig& config);

// Sensitivity factor of the power mean under without-replacement subsampling,
// by branch of q:
//   q < 0   : (1-2^q)^2 b^(2q-2) / (a^q - b^q)^2
//   q = 0   : 1 / ((b+eps)^2 (ln b - ln a)^2)
//   0 < q<1 : q^2 a^(2q) / ((b+(1-q)eps)^2 (b^q - a^q)^2)
//   q = 1   : 1 / (b-a)^2
//   q > 1   : q^2 a^(2q) / ((b+q*eps)^2 (b^q - a^q)^2)
// Requires 0 < a < b (a = 0 is admitted only for q = 1) and finite q.
double gamma_factor(double epsilon, double a, double b, double q);

// Probability bound on |W_q(subsample of n) - W_q(population of N)| >= eps
// when the subsample is drawn uniformly without replacement:
//   finite q : min{1, 2 exp(-2 n eps^2 Gamma / ((1 - n/N)(1 + 1/m)))},
//              m = min(n, N-n), Gamma evaluated at (eps, u_min, u_max, q)
//   q = +-inf: 1 - n/N
// Requires 1 <= n < N and eps > 0.
double power_mean_concentration_bound(int n, int population, double epsilon,
                                      const WelfareConfig& config);

// Two-sided Hoeffding-Serfling bound for the mean of a without-replacement
// subsample of a population contained in [a, b]:
//   min{1, 2 exp(-2 eps^2 n / ((1 - n/N)(1 + 1/m)(b-a)^2))}.
// A degenerate range a = b returns 0 (every subsample equals the mean).
double hoeffding_serfling_bound(int n, int population, double epsilon, double a, double b);

// Uniform random size-n subset of {0..N-1}, deterministic given the seed.
AssessorSet sample_assessors(int population, int n, std::uint64_t seed);

// Informational bases of reported utilities: measurability/comparability
// assumptions that constrain which welfare exponents are admissible.
enum class InformationalBasis { ONCI, CNCI, CUCI, OLCI, CFCI, CRSI };

// Admissible power-mean exponents for a basis; `impossible` marks bases where
// no acceptable aggregation rule exists at all.
struct AdmissibleQ {
    bool impossible = false;
    bool all_finite_reals = false;
    std::vector<double> special_values;  // +-inf and/or 1

    bool contains(double q) const;
    std::string describe() const;
};

AdmissibleQ allowed_q_for_basis(InformationalBasis basis);

const char* to_string(InformationalBasis basis);

}  // namespace paa

#endif  // PAA_WELFARE_HPP
