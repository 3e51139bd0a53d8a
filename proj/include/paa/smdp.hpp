#ifndef PAA_SMDP_HPP
#define PAA_SMDP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "paa/rng.hpp"
#include "paa/welfare.hpp"

namespace paa {

// Row drift up to this is renormalized silently, up to kKernelHardTolerance
// with a warning, beyond that ingestion fails. Scenario files hold decimal
// literals, so some drift is expected.
constexpr double kKernelSoftTolerance = 1e-9;
constexpr double kKernelHardTolerance = 1e-6;

// Finite transition kernel p(s'|s,a), stored as an (S*A) x S row-stochastic
// matrix with row index s*A + a.
class TransitionKernel {
  public:
    TransitionKernel() = default;
    TransitionKernel(int num_states, int num_actions);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    Eigen::Ref<const Eigen::VectorXd> row(int s, int a) const {
        return probs_.row(index(s, a)).transpose();
    }
    void set_row(int s, int a, Eigen::Ref<const Eigen::VectorXd> p) {
        probs_.row(index(s, a)) = p.transpose();
    }

    const Eigen::MatrixXd& matrix() const { return probs_; }
    Eigen::MatrixXd& matrix() { return probs_; }

    // Checks nonnegativity and renormalizes each row; calls `warn` for rows
    // drifting beyond the soft tolerance and throws beyond the hard one.
    void normalize(const std::function<void(const std::string&)>& warn = nullptr);

    // Next state sampled from p(.|s,a) with one uniform draw.
    int sample_next(int s, int a, Prng& rng) const;

  private:
    int index(int s, int a) const;

    int num_states_ = 0;
    int num_actions_ = 0;
    Eigen::MatrixXd probs_;
};

// Finite Social MDP: true dynamics, an N x S utility matrix, the welfare
// aggregation rule and a discount. Immutable after construction; the welfare
// of each state under the full society is cached.
class Smdp {
  public:
    Smdp(TransitionKernel kernel, Eigen::MatrixXd utilities, WelfareConfig welfare, double gamma);

    int num_states() const { return kernel_.num_states(); }
    int num_actions() const { return kernel_.num_actions(); }
    int num_individuals() const { return static_cast<int>(utilities_.rows()); }

    const TransitionKernel& kernel() const { return kernel_; }
    const Eigen::MatrixXd& utilities() const { return utilities_; }
    const WelfareConfig& welfare() const { return welfare_; }
    double gamma() const { return gamma_; }

    // W_q(u(., s)) over the full society, cached.
    double welfare_of_state(int s) const { return state_welfare_[s]; }
    const Eigen::VectorXd& state_welfare() const { return state_welfare_; }

    double min_value() const { return welfare_.u_min / (1.0 - gamma_); }
    double max_value() const { return welfare_.u_max / (1.0 - gamma_); }

  private:
    TransitionKernel kernel_;
    Eigen::MatrixXd utilities_;  // N x S
    WelfareConfig welfare_;
    double gamma_;
    Eigen::VectorXd state_welfare_;
};

// True dynamics paired with the approximate world model the planner consults,
// plus their realized sup-KL distance d = sup_(s,a) KL(p(.|s,a) || p_hat(.|s,a)).
struct ModelPair {
    TransitionKernel truth;
    TransitionKernel approx;
    double realized_d = 0.0;

    // Recomputes realized_d from the kernels and checks it matches.
    bool consistent(double tol = 1e-12) const;
};

// Pair a model with itself (d = 0 exactly).
ModelPair exact_model_pair(const TransitionKernel& kernel);

enum class PerturbMode { kUniformMixture };

// Approximate kernel p_hat = (1-lambda) p + lambda Uniform(S) rowwise, with
// realized_d computed exactly. lambda must lie in [0, 1].
ModelPair perturb_kernel(const TransitionKernel& kernel, double lambda,
                         PerturbMode mode = PerturbMode::kUniformMixture);

// Expected next-state welfare under the true dynamics (the SMDP reward):
// r(s,a) = sum_s' p(s'|s,a) W_q(u(., s')).
double true_reward(const Smdp& model, int s, int a);

// Options for sampled-reward evaluation. The default draws a fresh assessor
// set per sampled state, matching the independence structure the planner's
// analysis unions over; fixed_assessors reproduces the literal one-set reading.
struct EmpiricalRewardOptions {
    bool fixed_assessors = false;
};

// Monte-Carlo reward estimate: K states drawn i.i.d. from approx(.|s,a), each
// scored by W_q over a size-n assessor subsample. Result clamped to the
// utility range.
double empirical_reward(const Smdp& model, const TransitionKernel& approx, int s, int a,
                        std::int64_t num_samples, int num_assessors, Prng& rng,
                        const EmpiricalRewardOptions& opts = {});

// sup over (s,a) of KL(p(.|s,a) || p_hat(.|s,a)), with the 0 ln(0/x) = 0
// convention; +inf where p puts mass that p_hat lacks.
double sup_kl(const TransitionKernel& p, const TransitionKernel& p_hat);

// KL divergence of two probability rows (same conventions as sup_kl).
double kl_divergence(Eigen::Ref<const Eigen::VectorXd> p, Eigen::Ref<const Eigen::VectorXd> q);

// |E_p f - E_p_hat f| <= 2 (f_max - f_min) sqrt(min{d/2, 1 - e^-d}) for any f
// bounded in [f_min, f_max] and KL(p || p_hat) <= d; combines the Pinsker and
// Bretagnolle-Huber total-variation bounds.
double expectation_gap_bound(double f_min, double f_max, double d);

// First index i with u < cdf(i) for a probability row; tolerant of rows whose
// floating-point sum falls a few ulps short of 1.
int sample_index(Eigen::Ref<const Eigen::VectorXd> probs, double u);

}  // namespace paa

#endif  // PAA_SMDP_HPP
