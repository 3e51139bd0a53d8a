#include "paa/safeguard.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace paa {

namespace {

constexpr std::uint64_t kSafeSetStream = 0x5361666553ull;
constexpr std::uint64_t kActionDrawStream = 0x44726177ull;

Eigen::VectorXd one_hot(int num_actions, int a) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(num_actions);
    row[a] = 1.0;
    return row;
}

}  // namespace

BlackBoxPolicy make_uniform_policy(int num_actions) {
    if (num_actions < 1) throw std::invalid_argument("make_uniform_policy: need |A| >= 1");
    return [num_actions](int) {
        return Eigen::VectorXd::Constant(num_actions, 1.0 / num_actions).eval();
    };
}

BlackBoxPolicy make_myopic_policy(const Smdp& model, const ModelPair& pair,
                                  std::int64_t reward_samples, int num_assessors,
                                  std::uint64_t seed) {
    return [&model, &pair, reward_samples, num_assessors, seed](int s) {
        int best = 0;
        double best_r = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < model.num_actions(); ++a) {
            Prng rng(derive_seed(seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(a)}));
            const double r =
                empirical_reward(model, pair.approx, s, a, reward_samples, num_assessors, rng);
            if (r > best_r) {
                best_r = r;
                best = a;
            }
        }
        return one_hot(model.num_actions(), best);
    };
}

BlackBoxPolicy make_adversarial_policy(const Smdp& model, const Eigen::VectorXd& v_star) {
    if (v_star.size() != model.num_states())
        throw std::invalid_argument("make_adversarial_policy: V* size mismatch");
    Eigen::VectorXd v = v_star;
    return [&model, v](int s) {
        int worst = 0;
        double worst_ev = std::numeric_limits<double>::infinity();
        for (int a = 0; a < model.num_actions(); ++a) {
            const double ev = model.kernel().row(s, a).dot(v);
            if (ev < worst_ev) {
                worst_ev = ev;
                worst = a;
            }
        }
        return one_hot(model.num_actions(), worst);
    };
}

double alpha_threshold(double d, int society_size, std::int64_t n, std::int64_t reward_samples,
                       std::int64_t child_samples, std::int64_t depth, double gamma,
                       const WelfareConfig& welfare, double delta, int num_actions) {
    welfare.validate();
    if (!is_finite_q(welfare.q))
        throw std::invalid_argument("alpha_threshold: requires a finite welfare exponent q");
    if (!(d >= 0.0)) throw std::invalid_argument("alpha_threshold: need d >= 0");
    if (n < 1 || n > society_size) throw std::invalid_argument("alpha_threshold: need 1 <= n <= N");
    if (reward_samples < 1 || child_samples < 1 || depth < 1)
        throw std::invalid_argument("alpha_threshold: need H, K, C >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("alpha_threshold: need delta in (0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("alpha_threshold: need gamma in [0, 1)");
    if (num_actions < 1) throw std::invalid_argument("alpha_threshold: need |A| >= 1");

    const double du = welfare.delta_u();
    const double one_minus = 1.0 - gamma;
    const double d_prime = std::sqrt(std::min(d / 2.0, -std::expm1(-d)));
    const double gamma_max = gamma_factor(welfare.u_max, welfare.u_min, welfare.u_max, welfare.q);
    const double log_l = std::log(12.0) +
                         static_cast<double>(depth - 1) *
                             std::log(static_cast<double>(child_samples) * num_actions) -
                         std::log(delta);
    const double big_n = static_cast<double>(society_size);
    const double assessor_term =
        std::sqrt((big_n - static_cast<double>(n)) / (static_cast<double>(n) * big_n * gamma_max));
    const double reward_term = std::sqrt(du * du / (2.0 * static_cast<double>(reward_samples)));
    const double child_term = gamma * std::sqrt(du * du / (2.0 * static_cast<double>(child_samples) *
                                                           one_minus * one_minus));
    return 2.0 * du * d_prime / (one_minus * one_minus) +
           std::sqrt(log_l) / one_minus * (assessor_term + reward_term + child_term) +
           std::pow(gamma, static_cast<double>(depth)) * du / one_minus;
}

SafeguardConfig make_safeguard_config(const Smdp& model, const ModelPair& pair, double omega,
                                      double delta, const PlannerParams& params) {
    params.validate(model.num_individuals());
    if (!(omega >= model.min_value() && omega <= model.max_value()))
        throw std::invalid_argument("make_safeguard_config: omega must lie in [W_min, W_max]");
    SafeguardConfig config;
    config.omega = omega;
    config.delta = delta;
    config.params = params;
    config.d = pair.realized_d;
    config.alpha = alpha_threshold(pair.realized_d, model.num_individuals(), params.assessors,
                                   params.reward_samples, params.child_samples, params.depth,
                                   model.gamma(), model.welfare(), delta, model.num_actions());
    config.gamma_max = gamma_factor(model.welfare().u_max, model.welfare().u_min,
                                    model.welfare().u_max, model.welfare().q);
    config.d_prime = std::sqrt(std::min(pair.realized_d / 2.0, -std::expm1(-pair.realized_d)));
    return config;
}

std::vector<int> safe_action_set(const Smdp& model, const ModelPair& pair, int s,
                                 const SafeguardConfig& config, std::uint64_t seed,
                                 const PlannerOptions& opts) {
    const double threshold = config.threshold(model);
    std::vector<int> safe;
    for (int a = 0; a < model.num_actions(); ++a) {
        const std::uint64_t node_seed =
            derive_seed(seed, {kSafeSetStream, static_cast<std::uint64_t>(s)});
        const double q = q_hat(model, pair, s, a, config.params.depth, config.params, node_seed, opts);
        if (q >= threshold) safe.push_back(a);
    }
    return safe;
}

Eigen::VectorXd restrict_policy_row(const Eigen::VectorXd& row, const std::vector<int>& safe_set,
                                    bool literal_eq7) {
    Eigen::VectorXd masked = Eigen::VectorXd::Zero(row.size());
    double retained = 0.0;
    for (int a : safe_set) {
        masked[a] = row[a];
        retained += row[a];
    }
    if (retained <= 0.0) return Eigen::VectorXd::Zero(row.size());  // Halt row
    if (retained >= 1.0) return masked;                             // fully covered
    const double denom = literal_eq7 ? (1.0 - retained) : retained;
    return (masked / denom).eval();
}

StepOutcome safe_step(const Smdp& model, const ModelPair& pair, int s, const BlackBoxPolicy& policy,
                      const SafeguardConfig& config, std::uint64_t seed,
                      const SafeStepOptions& opts) {
    const std::vector<int>* safe = nullptr;
    std::vector<int> computed;
    if (opts.safe_set_cache) {
        auto it = opts.safe_set_cache->find(s);
        if (it == opts.safe_set_cache->end())
            it = opts.safe_set_cache
                     ->emplace(s, safe_action_set(model, pair, s, config, seed, opts.planner))
                     .first;
        safe = &it->second;
    } else {
        computed = safe_action_set(model, pair, s, config, seed, opts.planner);
        safe = &computed;
    }

    const Eigen::VectorXd row = policy(s);
    const Eigen::VectorXd restricted = restrict_policy_row(row, *safe, opts.literal_eq7);
    if (restricted.sum() <= 0.0) return StepOutcome{true, -1};

    Prng rng(derive_seed(seed, {kActionDrawStream, static_cast<std::uint64_t>(s)}));
    return StepOutcome{false, sample_index(restricted, rng.next_unit())};
}

StepOutcome unshielded_step(const BlackBoxPolicy& policy, int s, std::uint64_t seed) {
    Prng rng(derive_seed(seed, {kActionDrawStream, static_cast<std::uint64_t>(s)}));
    return StepOutcome{false, sample_index(policy(s), rng.next_unit())};
}

}  // namespace paa
