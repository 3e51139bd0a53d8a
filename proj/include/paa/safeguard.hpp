#ifndef PAA_SAFEGUARD_HPP
#define PAA_SAFEGUARD_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "paa/oracle.hpp"
#include "paa/planner.hpp"
#include "paa/smdp.hpp"

namespace paa {

// Opaque policy contract: state index -> distribution over actions.
using BlackBoxPolicy = std::function<Eigen::VectorXd(int state)>;

// Constant uniform rows.
BlackBoxPolicy make_uniform_policy(int num_actions);

// Deterministic argmax of a seeded empirical reward estimate per state; the
// estimate for a state depends only on (seed, state).
BlackBoxPolicy make_myopic_policy(const Smdp& model, const ModelPair& pair,
                                  std::int64_t reward_samples, int num_assessors,
                                  std::uint64_t seed);

// Deterministic argmin of the expected optimal successor value under the true
// dynamics: the most destructive choice available.
BlackBoxPolicy make_adversarial_policy(const Smdp& model, const Eigen::VectorXd& v_star);

// Conservativeness threshold of the safe-action filter:
//   alpha = 2 dU d' / (1-gamma)^2
//         + sqrt(ln(12 (C|A|)^(H-1) / delta)) / (1-gamma)
//           * ( sqrt((N-n)/(n N Gamma_max)) + sqrt(dU^2/(2K))
//             + gamma sqrt(dU^2 / (2C(1-gamma)^2)) )
//         + gamma^H dU / (1-gamma)
// with d' = sqrt(min{d/2, 1-e^-d}) and Gamma_max = Gamma(u_max, u_min, u_max, q).
// Requires finite q, 1 <= n <= N and delta in (0, 1).
double alpha_threshold(double d, int society_size, std::int64_t n, std::int64_t reward_samples,
                       std::int64_t child_samples, std::int64_t depth, double gamma,
                       const WelfareConfig& welfare, double delta, int num_actions);

// Safety floor omega, confidence delta, the sparse-sampling resources used to
// evaluate Q_hat, and the derived filter threshold gamma*omega + u_max + alpha.
struct SafeguardConfig {
    double omega = 0.0;
    double delta = 0.1;
    PlannerParams params;
    double d = 0.0;        // sup-KL fed into alpha
    double alpha = 0.0;    // derived
    double gamma_max = 0.0;
    double d_prime = 0.0;

    double threshold(const Smdp& model) const {
        return model.gamma() * omega + model.welfare().u_max + alpha;
    }
};

// Fills the derived fields; omega must lie in [W_min, W_max] of the model.
SafeguardConfig make_safeguard_config(const Smdp& model, const ModelPair& pair, double omega,
                                      double delta, const PlannerParams& params);

// Actions whose depth-H estimate clears the threshold:
//   { a : q_hat(s, a, H) >= gamma*omega + u_max + alpha }.
// Re-evaluates q_hat with fresh node streams on every call; may be empty.
std::vector<int> safe_action_set(const Smdp& model, const ModelPair& pair, int s,
                                 const SafeguardConfig& config, std::uint64_t seed,
                                 const PlannerOptions& opts = {});

// Restriction of a policy row to a safe set. Mass off the set is zeroed; a
// partially covered row is renormalized by the retained mass so it stays a
// distribution. literal_eq7 reproduces the printed 1 - Pi(s) denominator for
// audit; those rows do not normalize in general.
Eigen::VectorXd restrict_policy_row(const Eigen::VectorXd& row, const std::vector<int>& safe_set,
                                    bool literal_eq7 = false);

// One shielded interaction step. Halt is the declared outcome when no action
// is admitted or the policy places no mass on admitted actions.
struct StepOutcome {
    bool halted = true;
    int action = -1;
};

struct SafeStepOptions {
    PlannerOptions planner;
    bool literal_eq7 = false;
    // Opt-in per-episode reuse of safe sets keyed by state.
    std::unordered_map<int, std::vector<int>>* safe_set_cache = nullptr;
};

StepOutcome safe_step(const Smdp& model, const ModelPair& pair, int s, const BlackBoxPolicy& policy,
                      const SafeguardConfig& config, std::uint64_t seed,
                      const SafeStepOptions& opts = {});

// Unshielded counterpart drawing from the same per-(seed, state) stream, so a
// shield that admits everything reproduces the unshielded trajectory exactly.
StepOutcome unshielded_step(const BlackBoxPolicy& policy, int s, std::uint64_t seed);

}  // namespace paa

#endif  // PAA_SAFEGUARD_HPP
