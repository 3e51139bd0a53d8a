#include "paa/planner.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace paa {

namespace {

constexpr std::uint64_t kRewardStream = 0x52;
constexpr std::uint64_t kChildStream = 0x43;
constexpr std::uint64_t kSubtreeStream = 0x54;

constexpr double kMaxRepresentable = 9.0e18;  // int64 guard for ceil'd parameters

std::int64_t ceil_to_int64(double x, const char* what) {
    if (!(x < kMaxRepresentable))
        throw std::overflow_error(std::string(what) + " exceeds representable integer range");
    return static_cast<std::int64_t>(std::ceil(x));
}

struct TreeContext {
    const Smdp& model;
    const ModelPair& pair;
    const PlannerParams& params;
    const PlannerOptions& opts;
};

double q_hat_node(const TreeContext& ctx, int s, int a, std::int64_t h, std::uint64_t node_seed) {
    if (h == 0) return 0.0;
    EmpiricalRewardOptions reward_opts;
    reward_opts.fixed_assessors = ctx.opts.fixed_assessors;
    Prng reward_rng(derive_seed(node_seed, {kRewardStream}));
    const double reward =
        empirical_reward(ctx.model, ctx.pair.approx, s, a, ctx.params.reward_samples,
                         static_cast<int>(ctx.params.assessors), reward_rng, reward_opts);
    if (h == 1 || ctx.model.gamma() == 0.0) return reward;

    const int num_actions = ctx.model.num_actions();
    Prng child_rng(derive_seed(node_seed, {kChildStream}));
    double acc = 0.0;
    for (std::int64_t c = 0; c < ctx.params.child_samples; ++c) {
        const int child = ctx.pair.approx.sample_next(s, a, child_rng);
        const std::uint64_t child_seed =
            derive_seed(node_seed, {kSubtreeStream, static_cast<std::uint64_t>(c)});
        double best = -std::numeric_limits<double>::infinity();
        for (int ap = 0; ap < num_actions; ++ap) {
            const double q = q_hat_node(ctx, child, ap, h - 1,
                                        derive_seed(child_seed, {static_cast<std::uint64_t>(ap)}));
            if (q > best) best = q;
        }
        acc += best;
    }
    return reward + ctx.model.gamma() * (acc / static_cast<double>(ctx.params.child_samples));
}

void check_node_budget(const Smdp& model, const PlannerParams& params,
                       const PlannerOptions& opts) {
    const double nodes = q_hat_node_count(params.depth, params.child_samples, model.num_actions());
    if (nodes > opts.node_budget) {
        std::ostringstream msg;
        msg << "q_hat: tree of " << nodes << " nodes exceeds node budget " << opts.node_budget
            << " (H=" << params.depth << ", C=" << params.child_samples
            << ", |A|=" << model.num_actions() << ")";
        throw NodeBudgetError(msg.str(), nodes);
    }
}

void check_pair(const Smdp& model, const ModelPair& pair) {
    if (pair.approx.num_states() != model.num_states() ||
        pair.approx.num_actions() != model.num_actions())
        throw std::invalid_argument("planner: approximate kernel dimension mismatch");
}

double log_base_gamma(double x, double gamma) { return std::log(x) / std::log(gamma); }

// ln(12 (C|A|)^(H-1) / delta), assembled in log space so huge C and H cannot
// overflow.
double log_split_budget(std::int64_t C, int num_actions, std::int64_t H, double delta) {
    return std::log(12.0) +
           static_cast<double>(H - 1) * std::log(static_cast<double>(C) * num_actions) -
           std::log(delta);
}

void validate_tolerances(const ToleranceSpec& tol, bool needs_delta) {
    tol.welfare.validate();
    if (!is_finite_q(tol.welfare.q))
        throw std::invalid_argument("parameter calculators require a finite welfare exponent q");
    if (!(tol.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(tol.gamma >= 0.0 && tol.gamma < 1.0))
        throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(tol.d >= 0.0)) throw std::invalid_argument("model accuracy d must be >= 0");
    if (needs_delta && !(tol.delta > 0.0 && tol.delta < 1.0))
        throw std::invalid_argument("delta must lie in (0, 1)");
}

// d < eps^2 (1-gamma)^6 / (8 dU^2), i.e. eps > sqrt(8d) dU / (1-gamma)^3.
void check_feasible(const ToleranceSpec& tol) {
    const double du = tol.welfare.delta_u();
    const double one_minus = 1.0 - tol.gamma;
    const double eps_boundary = std::sqrt(8.0 * tol.d) * du / (one_minus * one_minus * one_minus);
    if (!(tol.epsilon > eps_boundary)) {
        std::ostringstream msg;
        msg << "infeasible tolerances: model accuracy d = " << tol.d
            << " requires epsilon > " << eps_boundary << " (requested " << tol.epsilon << ")";
        throw InfeasibleToleranceError(msg.str(), eps_boundary);
    }
}

std::int64_t choose_assessors(double beta, const ToleranceSpec& tol, int society_size,
                              std::int64_t K) {
    const double du = tol.welfare.delta_u();
    const double g = gamma_factor(beta, tol.welfare.u_min, tol.welfare.u_max, tol.welfare.q);
    const double n_real =
        society_size / (1.0 + du * du * society_size * g / (2.0 * static_cast<double>(K)));
    const std::int64_t n = std::max<std::int64_t>(1, ceil_to_int64(n_real, "assessor count"));
    return std::min<std::int64_t>(n, society_size);
}

}  // namespace

void PlannerParams::validate(int society_size) const {
    if (depth < 1 || reward_samples < 1 || child_samples < 1 || assessors < 1)
        throw std::invalid_argument("PlannerParams: H, K, C, n must all be >= 1");
    if (assessors > society_size)
        throw std::invalid_argument("PlannerParams: n must not exceed the society size");
}

double q_hat_node_count(std::int64_t depth, std::int64_t child_samples, int num_actions) {
    const double branch = static_cast<double>(child_samples) * num_actions;
    double nodes = 0.0, layer = 1.0;
    for (std::int64_t i = 0; i < depth; ++i) {
        nodes += layer;
        layer *= branch;
        if (!std::isfinite(nodes)) break;
    }
    return nodes;
}

double q_hat(const Smdp& model, const ModelPair& pair, int s, int a, std::int64_t h,
             const PlannerParams& params, std::uint64_t seed, const PlannerOptions& opts) {
    params.validate(model.num_individuals());
    check_pair(model, pair);
    if (h < 0) throw std::invalid_argument("q_hat: depth must be >= 0");
    if (s < 0 || s >= model.num_states() || a < 0 || a >= model.num_actions())
        throw std::out_of_range("q_hat: state or action index out of range");
    PlannerParams bounded = params;
    bounded.depth = h;
    if (h > 0) check_node_budget(model, bounded, opts);
    TreeContext ctx{model, pair, params, opts};
    return q_hat_node(ctx, s, a, h, derive_seed(seed, {static_cast<std::uint64_t>(s),
                                                       static_cast<std::uint64_t>(a),
                                                       static_cast<std::uint64_t>(h)}));
}

int paa_action(const Smdp& model, const ModelPair& pair, int s, const PlannerParams& params,
               std::uint64_t seed, const PlannerOptions& opts) {
    int best_action = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < model.num_actions(); ++a) {
        const double q = q_hat(model, pair, s, a, params.depth, params, seed, opts);
        if (q > best_q) {
            best_q = q;
            best_action = a;
        }
    }
    return best_action;
}

ErrorBudget q_error_bound(const PlannerParams& params, const ToleranceSpec& tol, int num_actions,
                          int society_size) {
    validate_tolerances(tol, true);
    params.validate(society_size);
    if (num_actions < 1) throw std::invalid_argument("q_error_bound: need |A| >= 1");

    const double du = tol.welfare.delta_u();
    const double gamma = tol.gamma;
    const double one_minus = 1.0 - gamma;
    const std::int64_t H = params.depth, K = params.reward_samples, C = params.child_samples,
                       n = params.assessors;
    const double N = static_cast<double>(society_size);

    ErrorBudget budget;
    const double log_l = log_split_budget(C, num_actions, H, tol.delta);  // ln(2/delta_i)
    const double log_delta_i = std::log(2.0) - log_l;
    budget.delta1 = budget.delta3 = budget.delta5 = std::exp(log_delta_i);

    // Model-error terms (Pinsker / Bretagnolle-Huber route).
    const double d_prime = std::sqrt(std::min(tol.d / 2.0, -std::expm1(-tol.d)));
    budget.eps2 = 2.0 * du * d_prime;
    budget.eps4 = 2.0 * du * d_prime / one_minus;

    // Assessor subsampling term, inverted through Gamma_max so the bound is
    // explicit in eps1.
    if (n < society_size) {
        const double gamma_max =
            gamma_factor(tol.welfare.u_max, tol.welfare.u_min, tol.welfare.u_max, tol.welfare.q);
        budget.eps1 = std::sqrt((N - static_cast<double>(n)) /
                                (static_cast<double>(n) * N * gamma_max) * log_l);
    }
    budget.eps3 = std::sqrt(du * du / (2.0 * static_cast<double>(K)) * log_l);
    budget.eps5 =
        std::sqrt(du * du / (2.0 * static_cast<double>(C) * one_minus * one_minus) * log_l);

    budget.alpha_h = (budget.eps1 + budget.eps2 + budget.eps3 +
                      gamma * (budget.eps4 + budget.eps5) +
                      std::pow(gamma, static_cast<double>(H)) * du) /
                     one_minus;
    // 2 (delta1+delta3+delta5)(C|A|)^(H-1) collapses to delta under the equal
    // split; evaluating it directly dodges overflow of the power.
    budget.phi_h = std::min(1.0, tol.delta);
    return budget;
}

ParamResult compute_paa_params(const ToleranceSpec& tol, int num_actions, int society_size,
                               std::optional<std::int64_t> k_override) {
    validate_tolerances(tol, true);
    if (num_actions < 1 || society_size < 1)
        throw std::invalid_argument("compute_paa_params: need |A| >= 1 and N >= 1");
    check_feasible(tol);

    const double du = tol.welfare.delta_u();
    if (!(du > 0.0)) throw std::invalid_argument("compute_paa_params: need u_min < u_max");
    const double gamma = tol.gamma;
    const double one_minus = 1.0 - gamma;

    // Planning-window exponent k: the feasibility check guarantees the log
    // argument is positive.
    const double k_arg =
        one_minus * tol.epsilon / du - std::sqrt(8.0 * tol.d) / (one_minus * one_minus);
    std::int64_t k;
    if (gamma == 0.0) {
        k = k_override.value_or(1);
    } else {
        const double k_bound = log_base_gamma(k_arg, gamma);
        k = k_override.value_or(std::max<std::int64_t>(1, ceil_to_int64(k_bound, "k")));
        if (k < 1 || static_cast<double>(k) < k_bound)
            throw std::invalid_argument("compute_paa_params: k override below the admissible bound");
    }

    const double beta = one_minus * one_minus * tol.epsilon / 8.0 -
                        std::sqrt(tol.d) * du / (std::sqrt(8.0) * one_minus) -
                        one_minus * std::pow(gamma, static_cast<double>(k)) * du / 8.0;
    if (!(beta > 0.0))
        throw std::invalid_argument("compute_paa_params: beta <= 0 for the chosen k");

    PlannerParams params;
    params.depth = gamma == 0.0
                       ? 1
                       : std::max<std::int64_t>(1, ceil_to_int64(log_base_gamma(beta / du, gamma),
                                                                 "planning depth"));
    const double ratio_sq = du * du / (beta * beta);
    double k_real;
    if (params.depth == 1) {
        k_real = ratio_sq / 2.0 * std::log(24.0 * static_cast<double>(k) / tol.delta);
    } else {
        const double h1 = static_cast<double>(params.depth - 1);
        k_real = ratio_sq * (std::log(24.0 * static_cast<double>(k)) +
                             h1 * std::log(h1 * num_actions * ratio_sq) + std::log(1.0 / tol.delta));
    }
    params.reward_samples = std::max<std::int64_t>(1, ceil_to_int64(k_real, "K"));
    params.child_samples = std::max<std::int64_t>(
        1, ceil_to_int64(gamma * gamma / (one_minus * one_minus) *
                             static_cast<double>(params.reward_samples),
                         "C"));
    params.assessors = choose_assessors(beta, tol, society_size, params.reward_samples);

    ParamResult result{params, q_error_bound(params, tol, num_actions, society_size)};
    result.budget.beta = beta;
    result.budget.k = k;
    return result;
}

ParamResult compute_aa_params(const ToleranceSpec& tol, int num_actions, int society_size) {
    validate_tolerances(tol, false);
    if (num_actions < 1 || society_size < 1)
        throw std::invalid_argument("compute_aa_params: need |A| >= 1 and N >= 1");
    check_feasible(tol);

    const double du = tol.welfare.delta_u();
    if (!(du > 0.0)) throw std::invalid_argument("compute_aa_params: need u_min < u_max");
    const double gamma = tol.gamma;
    const double one_minus = 1.0 - gamma;

    const double beta = one_minus * one_minus * tol.epsilon / 10.0 -
                        std::sqrt(2.0 * tol.d) * du / (5.0 * one_minus);
    if (!(beta > 0.0)) throw std::invalid_argument("compute_aa_params: beta <= 0");

    PlannerParams params;
    params.depth = gamma == 0.0
                       ? 1
                       : std::max<std::int64_t>(1, ceil_to_int64(log_base_gamma(beta / du, gamma),
                                                                 "planning depth"));
    const double ratio_sq = du * du / (beta * beta);
    double k_real;
    if (params.depth == 1) {
        k_real = ratio_sq / 2.0 * std::log(12.0 * du / beta);
    } else {
        const double h1 = static_cast<double>(params.depth - 1);
        k_real = ratio_sq * (std::log(12.0) + h1 * std::log(h1 * num_actions * ratio_sq) +
                             std::log(du / beta));
    }
    params.reward_samples = std::max<std::int64_t>(1, ceil_to_int64(k_real, "K"));
    params.child_samples = std::max<std::int64_t>(
        1, ceil_to_int64(gamma * gamma / (one_minus * one_minus) *
                             static_cast<double>(params.reward_samples),
                         "C"));
    params.assessors = choose_assessors(beta, tol, society_size, params.reward_samples);

    // The almost-sure argument runs the same budget with delta replaced by the
    // internal rate beta/dU.
    ToleranceSpec effective = tol;
    effective.delta = std::min(beta / du, 0.999999);
    ParamResult result{params, q_error_bound(params, effective, num_actions, society_size)};
    result.budget.beta = beta;
    result.budget.k = 0;
    return result;
}

SuboptimalityBound suboptimality_bound(double eps_q, double delta_q, double gamma, double v_range,
                                       std::optional<std::int64_t> k) {
    if (!(eps_q >= 0.0)) throw std::invalid_argument("suboptimality_bound: need eps_q >= 0");
    if (!(delta_q >= 0.0 && delta_q < 1.0))
        throw std::invalid_argument("suboptimality_bound: need delta_q in [0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("suboptimality_bound: need gamma in [0, 1)");
    SuboptimalityBound out;
    const double one_minus = 1.0 - gamma;
    out.bound_almost_sure = (2.0 * eps_q + 2.0 * delta_q * v_range) / one_minus;
    if (k) {
        if (*k < 1) throw std::invalid_argument("suboptimality_bound: need k >= 1");
        out.bound_high_confidence =
            2.0 * eps_q / one_minus + std::pow(gamma, static_cast<double>(*k)) * v_range;
        out.confidence = std::max(0.0, 1.0 - 2.0 * static_cast<double>(*k) * delta_q);
    }
    return out;
}

}  // namespace paa
