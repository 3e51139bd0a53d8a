#ifndef PAA_ORACLE_HPP
#define PAA_ORACLE_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "paa/smdp.hpp"

namespace paa {

// Exact values on a small instance: v[s] = max_a q[s][a] by construction, and
// every entry lies in [u_min/(1-gamma), u_max/(1-gamma)].
struct ValueTable {
    Eigen::VectorXd v;      // |S|
    Eigen::MatrixXd q;      // |S| x |A|
    double residual = 0.0;  // final sup-norm iterate residual
    int iterations = 0;
};

// Stochastic policy, one distribution row per state.
struct Policy {
    Eigen::MatrixXd probs;  // |S| x |A|, rows sum to 1

    int num_states() const { return static_cast<int>(probs.rows()); }
    int num_actions() const { return static_cast<int>(probs.cols()); }
    void validate() const;

    static Policy deterministic(int num_states, int num_actions,
                                const std::vector<int>& actions);
    static Policy uniform(int num_states, int num_actions);
};

// Bellman optimality iteration to sup-norm accuracy tol: iterates until the
// successive residual is at most tol (1-gamma) / (2 gamma), which the
// contraction argument converts into ||v - V*||_inf <= tol. gamma = 0 needs a
// single sweep. Iterates start at the value floor so every intermediate table
// stays inside [W_min, W_max] / (1-gamma).
ValueTable value_iteration(const Smdp& model, double tol = 1e-10);

// Same scheme with the policy Bellman operator; ||v - V^pi||_inf <= tol.
Eigen::VectorXd policy_evaluation(const Smdp& model, const Policy& policy, double tol = 1e-10);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

// Mean over `trials` truncated rollouts of sum_{t<T} gamma^t W_q(u(s_{t+1})).
// Truncation biases the estimate against V^pi by at most
// gamma^T u_max / (1-gamma) in absolute value. Each trial draws its stream
// from (master_seed, trial index), so results do not depend on evaluation
// order.
MonteCarloEstimate monte_carlo_welfare(const Smdp& model, const Policy& policy, int start_state,
                                       int horizon, std::int64_t trials,
                                       std::uint64_t master_seed);

// Deterministic argmax extraction; ties broken by lowest action index.
Policy greedy_policy(const ValueTable& table);

}  // namespace paa

#endif  // PAA_ORACLE_HPP
