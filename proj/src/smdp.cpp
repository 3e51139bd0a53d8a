#include "paa/smdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace paa {

TransitionKernel::TransitionKernel(int num_states, int num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
    if (num_states < 1 || num_actions < 1)
        throw std::invalid_argument("TransitionKernel: need |S| >= 1 and |A| >= 1");
    probs_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_states) * num_actions, num_states);
}

int TransitionKernel::index(int s, int a) const {
    if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_)
        throw std::out_of_range("TransitionKernel: state or action index out of range");
    return s * num_actions_ + a;
}

void TransitionKernel::normalize(const std::function<void(const std::string&)>& warn) {
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            auto r = probs_.row(index(s, a));
            if ((r.array() < 0.0).any()) {
                std::ostringstream msg;
                msg << "kernel row (s=" << s << ", a=" << a << ") has a negative entry";
                throw std::invalid_argument(msg.str());
            }
            const double sum = r.sum();
            const double drift = std::abs(sum - 1.0);
            if (drift > kKernelHardTolerance) {
                std::ostringstream msg;
                msg << "kernel row (s=" << s << ", a=" << a << ") sums to " << sum
                    << ", beyond tolerance " << kKernelHardTolerance;
                throw std::invalid_argument(msg.str());
            }
            if (drift > kKernelSoftTolerance && warn) {
                std::ostringstream msg;
                msg << "kernel row (s=" << s << ", a=" << a << ") sums to " << sum
                    << "; renormalizing";
                warn(msg.str());
            }
            if (sum != 1.0) r /= sum;
        }
    }
}

int TransitionKernel::sample_next(int s, int a, Prng& rng) const {
    return sample_index(row(s, a), rng.next_unit());
}

int sample_index(Eigen::Ref<const Eigen::VectorXd> probs, double u) {
    double cdf = 0.0;
    const Eigen::Index n = probs.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        cdf += probs[i];
        if (u < cdf) return static_cast<int>(i);
    }
    // u landed in the ulp gap above the accumulated sum; return the last
    // index with positive mass.
    for (Eigen::Index i = n - 1; i >= 0; --i)
        if (probs[i] > 0.0) return static_cast<int>(i);
    throw std::invalid_argument("sample_index: row has no mass");
}

Smdp::Smdp(TransitionKernel kernel, Eigen::MatrixXd utilities, WelfareConfig welfare, double gamma)
    : kernel_(std::move(kernel)),
      utilities_(std::move(utilities)),
      welfare_(welfare),
      gamma_(gamma) {
    welfare_.validate();
    if (!(gamma_ >= 0.0 && gamma_ < 1.0))
        throw std::invalid_argument("Smdp: gamma must lie in [0, 1)");
    if (utilities_.rows() < 1)
        throw std::invalid_argument("Smdp: need at least one individual");
    if (utilities_.cols() != kernel_.num_states())
        throw std::invalid_argument("Smdp: utility matrix must have one column per state");
    kernel_.normalize();
    state_welfare_.resize(kernel_.num_states());
    for (int s = 0; s < kernel_.num_states(); ++s)
        state_welfare_[s] = power_mean(utilities_.col(s), welfare_);
}

bool ModelPair::consistent(double tol) const {
    const double recomputed = sup_kl(truth, approx);
    if (std::isinf(recomputed) || std::isinf(realized_d))
        return std::isinf(recomputed) && std::isinf(realized_d);
    return std::abs(recomputed - realized_d) <= tol;
}

ModelPair exact_model_pair(const TransitionKernel& kernel) {
    return ModelPair{kernel, kernel, 0.0};
}

ModelPair perturb_kernel(const TransitionKernel& kernel, double lambda, PerturbMode mode) {
    if (mode != PerturbMode::kUniformMixture)
        throw std::invalid_argument("perturb_kernel: unknown mode");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("perturb_kernel: lambda must lie in [0, 1]");
    ModelPair pair;
    pair.truth = kernel;
    pair.approx = kernel;
    if (lambda > 0.0) {
        const double uniform = 1.0 / kernel.num_states();
        pair.approx.matrix() =
            ((1.0 - lambda) * kernel.matrix().array() + lambda * uniform).matrix();
    }
    pair.realized_d = sup_kl(pair.truth, pair.approx);
    return pair;
}

double true_reward(const Smdp& model, int s, int a) {
    return model.kernel().row(s, a).dot(model.state_welfare());
}

double empirical_reward(const Smdp& model, const TransitionKernel& approx, int s, int a,
                        std::int64_t num_samples, int num_assessors, Prng& rng,
                        const EmpiricalRewardOptions& opts) {
    if (num_samples < 1) throw std::invalid_argument("empirical_reward: need K >= 1");
    const int society = model.num_individuals();
    if (num_assessors < 1 || num_assessors > society)
        throw std::invalid_argument("empirical_reward: need 1 <= n <= N");
    if (approx.num_states() != model.num_states() || approx.num_actions() != model.num_actions())
        throw std::invalid_argument("empirical_reward: model/approx dimension mismatch");

    const bool full_society = num_assessors == society;
    std::vector<int> assessors;
    if (!full_society && opts.fixed_assessors)
        assessors = sample_without_replacement(society, num_assessors, rng);

    Eigen::VectorXd sampled(num_assessors);
    double sum = 0.0;
    for (std::int64_t k = 0; k < num_samples; ++k) {
        const int next = approx.sample_next(s, a, rng);
        if (full_society) {
            sum += model.welfare_of_state(next);
            continue;
        }
        if (!opts.fixed_assessors)
            assessors = sample_without_replacement(society, num_assessors, rng);
        for (int i = 0; i < num_assessors; ++i)
            sampled[i] = model.utilities()(assessors[static_cast<std::size_t>(i)], next);
        sum += power_mean(sampled, model.welfare());
    }
    const double mean = sum / static_cast<double>(num_samples);
    return std::clamp(mean, model.welfare().u_min, model.welfare().u_max);
}

double kl_divergence(Eigen::Ref<const Eigen::VectorXd> p, Eigen::Ref<const Eigen::VectorXd> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: dimension mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;  // 0 ln(0/x) = 0
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        sum += p[i] * std::log(p[i] / q[i]);
    }
    // Rounding can leave a tiny negative for near-identical rows.
    return std::max(sum, 0.0);
}

double sup_kl(const TransitionKernel& p, const TransitionKernel& p_hat) {
    if (p.num_states() != p_hat.num_states() || p.num_actions() != p_hat.num_actions())
        throw std::invalid_argument("sup_kl: kernel dimension mismatch");
    double worst = 0.0;
    for (int s = 0; s < p.num_states(); ++s)
        for (int a = 0; a < p.num_actions(); ++a)
            worst = std::max(worst, kl_divergence(p.row(s, a), p_hat.row(s, a)));
    return worst;
}

double expectation_gap_bound(double f_min, double f_max, double d) {
    if (!(f_min >= 0.0 && f_max >= f_min))
        throw std::invalid_argument("expectation_gap_bound: need 0 <= f_min <= f_max");
    if (d < 0.0) throw std::invalid_argument("expectation_gap_bound: need d >= 0");
    const double tv2 = std::min(d / 2.0, -std::expm1(-d));  // squared TV bound
    return 2.0 * (f_max - f_min) * std::sqrt(tv2);
}

}  // namespace paa
