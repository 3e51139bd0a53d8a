#include "paa/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace paa {

namespace {

constexpr int kMaxSweeps = 1'000'000;

// Reward matrix R(s,a) = sum_s' p(s'|s,a) w(s'), reshaped from the stacked
// kernel rows.
Eigen::MatrixXd reward_matrix(const Smdp& model) {
    const int S = model.num_states(), A = model.num_actions();
    const Eigen::VectorXd stacked = model.kernel().matrix() * model.state_welfare();
    Eigen::MatrixXd r(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) r(s, a) = stacked[s * A + a];
    return r;
}

double stop_residual(double tol, double gamma) {
    return gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : 0.0;
}

}  // namespace

void Policy::validate() const {
    for (int s = 0; s < num_states(); ++s) {
        if ((probs.row(s).array() < 0.0).any() || std::abs(probs.row(s).sum() - 1.0) > 1e-9)
            throw std::invalid_argument("Policy: row " + std::to_string(s) +
                                        " is not a distribution");
    }
}

Policy Policy::deterministic(int num_states, int num_actions, const std::vector<int>& actions) {
    if (static_cast<int>(actions.size()) != num_states)
        throw std::invalid_argument("Policy::deterministic: one action per state required");
    Policy pi;
    pi.probs = Eigen::MatrixXd::Zero(num_states, num_actions);
    for (int s = 0; s < num_states; ++s) pi.probs(s, actions[static_cast<std::size_t>(s)]) = 1.0;
    return pi;
}

Policy Policy::uniform(int num_states, int num_actions) {
    Policy pi;
    pi.probs = Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions);
    return pi;
}

ValueTable value_iteration(const Smdp& model, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
    const int S = model.num_states(), A = model.num_actions();
    const double gamma = model.gamma();
    const Eigen::MatrixXd r = reward_matrix(model);

    ValueTable table;
    table.v = Eigen::VectorXd::Constant(S, model.min_value());
    table.q = Eigen::MatrixXd::Zero(S, A);
    const double stop = stop_residual(tol, gamma);

    for (;;) {
        const Eigen::VectorXd expected = model.kernel().matrix() * table.v;  // (S*A)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) table.q(s, a) = r(s, a) + gamma * expected[s * A + a];
        const Eigen::VectorXd next = table.q.rowwise().maxCoeff();
        table.residual = (next - table.v).cwiseAbs().maxCoeff();
        table.v = next;
        ++table.iterations;
        if (gamma == 0.0 || table.residual <= stop) break;
        if (table.iterations >= kMaxSweeps)
            throw std::runtime_error("value_iteration: sweep budget exhausted");
    }
    return table;
}

Eigen::VectorXd policy_evaluation(const Smdp& model, const Policy& policy, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("policy_evaluation: tol must be > 0");
    policy.validate();
    const int S = model.num_states(), A = model.num_actions();
    if (policy.num_states() != S || policy.num_actions() != A)
        throw std::invalid_argument("policy_evaluation: policy/model dimension mismatch");
    const double gamma = model.gamma();
    const Eigen::MatrixXd r = reward_matrix(model);

    // Policy-averaged reward and transition matrix.
    Eigen::VectorXd r_pi(S);
    Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s) {
        r_pi[s] = policy.probs.row(s).dot(r.row(s));
        for (int a = 0; a < A; ++a)
            p_pi.row(s) += policy.probs(s, a) * model.kernel().row(s, a).transpose();
    }

    Eigen::VectorXd v = Eigen::VectorXd::Constant(S, model.min_value());
    const double stop = stop_residual(tol, gamma);
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const Eigen::VectorXd next = r_pi + gamma * (p_pi * v);
        const double residual = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (gamma == 0.0 || residual <= stop) return v;
    }
    throw std::runtime_error("policy_evaluation: sweep budget exhausted");
}

MonteCarloEstimate monte_carlo_welfare(const Smdp& model, const Policy& policy, int start_state,
                                       int horizon, std::int64_t trials,
                                       std::uint64_t master_seed) {
    if (start_state < 0 || start_state >= model.num_states())
        throw std::invalid_argument("monte_carlo_welfare: invalid start state");
    if (horizon < 1 || trials < 1)
        throw std::invalid_argument("monte_carlo_welfare: need T >= 1 and M >= 1");
    policy.validate();

    const int S = model.num_states(), A = model.num_actions();
    const Eigen::VectorXd& w = model.state_welfare();

    // Row-major CDFs so each step costs two uniform draws and two scans.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor action_cdf = policy.probs;
    for (int s = 0; s < S; ++s)
        for (int a = 1; a < A; ++a) action_cdf(s, a) += action_cdf(s, a - 1);
    RowMajor state_cdf = model.kernel().matrix();
    for (Eigen::Index row = 0; row < state_cdf.rows(); ++row)
        for (int sp = 1; sp < S; ++sp) state_cdf(row, sp) += state_cdf(row, sp - 1);

    std::vector<double> discount(static_cast<std::size_t>(horizon));
    discount[0] = 1.0;
    for (int t = 1; t < horizon; ++t)
        discount[static_cast<std::size_t>(t)] = discount[static_cast<std::size_t>(t - 1)] * model.gamma();

    auto pick = [](const double* cdf, int n, double u) {
        for (int i = 0; i < n; ++i)
            if (u < cdf[i]) return i;
        return n - 1;
    };

    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        Prng rng(derive_seed(master_seed, {static_cast<std::uint64_t>(trial)}));
        int s = start_state;
        double acc = 0.0;
        for (int t = 0; t < horizon; ++t) {
            const int a = pick(action_cdf.data() + static_cast<std::ptrdiff_t>(s) * A, A, rng.next_unit());
            const int next = pick(state_cdf.data() + (static_cast<std::ptrdiff_t>(s) * A + a) * S, S, rng.next_unit());
            acc += discount[static_cast<std::size_t>(t)] * w[next];
            s = next;
        }
        sum += acc;
        sum_sq += acc * acc;
    }

    MonteCarloEstimate out;
    out.trials = trials;
    out.estimate = sum / static_cast<double>(trials);
    if (trials > 1) {
        const double var =
            std::max(0.0, (sum_sq - sum * sum / static_cast<double>(trials)) /
                              static_cast<double>(trials - 1));
        out.std_error = std::sqrt(var / static_cast<double>(trials));
    }
    return out;
}

Policy greedy_policy(const ValueTable& table) {
    const int S = static_cast<int>(table.q.rows()), A = static_cast<int>(table.q.cols());
    std::vector<int> best(static_cast<std::size_t>(S), 0);
    for (int s = 0; s < S; ++s)
        for (int a = 1; a < A; ++a)
            if (table.q(s, a) > table.q(s, best[static_cast<std::size_t>(s)])) best[static_cast<std::size_t>(s)] = a;
    return Policy::deterministic(S, A, best);
}

}  // namespace paa
