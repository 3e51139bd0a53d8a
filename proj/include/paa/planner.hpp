#ifndef PAA_PLANNER_HPP
#define PAA_PLANNER_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "paa/smdp.hpp"

namespace paa {

// Sparse-sampling resources: depth H, reward samples K per node, sampled
// children C per node, assessors n polled per reward sample.
struct PlannerParams {
    std::int64_t depth = 1;           // H
    std::int64_t reward_samples = 1;  // K
    std::int64_t child_samples = 1;   // C
    std::int64_t assessors = 1;       // n

    void validate(int society_size) const;
};

// Target tolerances and model facts the parameter calculators consume.
struct ToleranceSpec {
    double epsilon = 0.1;   // value suboptimality target
    double delta = 0.1;     // failure probability budget
    double omega = 0.0;     // safety floor (safeguard only)
    double d = 0.0;         // sup-KL accuracy of the world model
    double gamma = 0.9;
    WelfareConfig welfare;
};

// Failure/error decomposition of the depth-H estimate, mirroring the planner
// analysis: eps2/eps4 are the model-error terms (not controllable by
// sampling), the rest invert the three concentration bounds at the equal
// delta split.
struct ErrorBudget {
    double beta = 0.0;
    std::int64_t k = 0;
    double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0, eps4 = 0.0, eps5 = 0.0;
    double delta1 = 0.0, delta3 = 0.0, delta5 = 0.0;
    double alpha_h = 0.0;  // |Q* - Q_hat^H| bound
    double phi_h = 0.0;    // probability it fails
};

// Tolerances cannot be met with a world model this inaccurate; epsilon must
// exceed min_feasible_epsilon for the given d.
class InfeasibleToleranceError : public std::runtime_error {
  public:
    InfeasibleToleranceError(const std::string& what, double min_feasible_epsilon)
        : std::runtime_error(what), min_feasible_epsilon_(min_feasible_epsilon) {}
    double min_feasible_epsilon() const { return min_feasible_epsilon_; }

  private:
    double min_feasible_epsilon_;
};

// The recursion would visit more nodes than the configured budget allows.
class NodeBudgetError : public std::runtime_error {
  public:
    NodeBudgetError(const std::string& what, double node_count)
        : std::runtime_error(what), node_count_(node_count) {}
    double node_count() const { return node_count_; }

  private:
    double node_count_;
};

struct PlannerOptions {
    double node_budget = 5e7;      // q_hat nodes allowed per root evaluation
    bool fixed_assessors = false;  // reuse one assessor set inside each reward estimate
};

// Number of q_hat nodes a depth-h evaluation expands: sum_{i<h} (C|A|)^i.
double q_hat_node_count(std::int64_t depth, std::int64_t child_samples, int num_actions);

// Depth-h sparse-sampling state-action value estimate:
//   h = 0  -> 0
//   h >= 1 -> empirical_reward(s,a;K,n) + gamma * mean_C max_a' q_hat(child, a', h-1)
// Children and reward samples are drawn from the approximate kernel. Every
// node derives its own streams from (seed, path), so the value is invariant
// to evaluation order. Throws NodeBudgetError before expanding a tree larger
// than opts.node_budget.
double q_hat(const Smdp& model, const ModelPair& pair, int s, int a, std::int64_t h,
             const PlannerParams& params, std::uint64_t seed, const PlannerOptions& opts = {});

// Greedy action on the depth-H estimates; ties break to the lowest index.
int paa_action(const Smdp& model, const ModelPair& pair, int s, const PlannerParams& params,
               std::uint64_t seed, const PlannerOptions& opts = {});

// Resources sufficient for a delta-epsilon-PAA policy given model accuracy d,
// welfare exponent q in R and |A| actions over a society of size N:
//   k    minimal integer >= log_gamma((1-gamma) eps / dU - sqrt(8d)/(1-gamma)^2)
//   beta (1-gamma)^2 eps/8 - sqrt(d) dU / (sqrt(8)(1-gamma)) - (1-gamma) gamma^k dU / 8
//   H    max{1, ceil(log_gamma(beta/dU))}
//   K    minimal integer meeting the sample bound (single-sweep branch at H=1)
//   C    ceil(gamma^2/(1-gamma)^2 K), at least 1
//   n    ceil(N (1 + dU^2 N Gamma(beta, u_min, u_max, q) / 2K)^-1), capped at N
// Requires d < eps^2 (1-gamma)^6 / (8 dU^2); throws InfeasibleToleranceError
// otherwise with the feasibility boundary attached.
struct ParamResult {
    PlannerParams params;
    ErrorBudget budget;
};
ParamResult compute_paa_params(const ToleranceSpec& tol, int num_actions, int society_size,
                               std::optional<std::int64_t> k_override = std::nullopt);

// Resources sufficient for an epsilon-AA (delta = 0) policy. Same feasibility
// requirement; beta = (1-gamma)^2 eps / 10 - sqrt(2d) dU / (5(1-gamma)) and K
// follows the almost-sure sample bound. The reported budget uses the internal
// failure rate beta/dU the almost-sure argument substitutes for delta.
ParamResult compute_aa_params(const ToleranceSpec& tol, int num_actions, int society_size);

// Error/confidence pair (alpha_H, phi_H) for arbitrary resources: splits the
// budget delta1 = delta3 = delta5 = delta / (6 (C|A|)^(H-1)), inverts the
// concentration bounds (the assessor term through Gamma_max), takes the model
// terms from d, and returns
//   alpha_H = (eps1+eps2+eps3 + gamma (eps4+eps5) + gamma^H dU) / (1-gamma)
//   phi_H   = min{1, 2 (delta1+delta3+delta5) (C|A|)^(H-1)}.
ErrorBudget q_error_bound(const PlannerParams& params, const ToleranceSpec& tol, int num_actions,
                          int society_size);

// Value loss of acting greedily on an estimate with |Q* - Q_hat| <= eps_q
// holding per pair with probability 1 - delta_q:
//   bound 1: 2 eps/(1-gamma) + gamma^k v_range, confidence 1 - 2 k delta_q
//   bound 2: (2 eps + 2 delta_q v_range) / (1-gamma), almost surely.
struct SuboptimalityBound {
    double bound_high_confidence = 0.0;
    double confidence = 0.0;
    double bound_almost_sure = 0.0;
};
SuboptimalityBound suboptimality_bound(double eps_q, double delta_q, double gamma, double v_range,
                                       std::optional<std::int64_t> k = std::nullopt);

}  // namespace paa

#endif  // PAA_PLANNER_HPP
