#include "paa/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace paa {

void WelfareConfig::validate() const {
    if (!std::isfinite(u_min) || !std::isfinite(u_max))
        throw std::invalid_argument("WelfareConfig: utility bounds must be finite");
    if (u_min < 0.0) throw std::invalid_argument("WelfareConfig: u_min must be >= 0");
    if (u_min > u_max) throw std::invalid_argument("WelfareConfig: u_min must be <= u_max");
    if (std::isnan(q)) throw std::invalid_argument("WelfareConfig: q is NaN");
    if (u_min == 0.0 && q < 1.0 && !is_pos_inf_q(q))
        throw std::invalid_argument("WelfareConfig: u_min = 0 is only admitted for q >= 1");
}

double power_mean(Eigen::Ref<const Eigen::VectorXd> values, const WelfareConfig& config) {
    config.validate();
    const Eigen::Index count = values.size();
    if (count == 0) throw std::invalid_argument("power_mean: empty utility vector");

    // One pass for bounds checking and the min/max branches.
    double lo = values[0], hi = values[0];
    for (Eigen::Index i = 0; i < count; ++i) {
        const double u = values[i];
        if (!(u >= config.u_min - 1e-12 && u <= config.u_max + 1e-12)) {
            std::ostringstream msg;
            msg << "power_mean: entry " << i << " = " << u << " outside [" << config.u_min
                << ", " << config.u_max << "]";
            throw std::invalid_argument(msg.str());
        }
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }

    const double q = config.q;
    double result;
    if (is_neg_inf_q(q)) {
        result = lo;
    } else if (is_pos_inf_q(q)) {
        result = hi;
    } else if (q == 0.0) {
        if (lo <= 0.0) throw std::invalid_argument("power_mean: zero entry with q < 1");
        result = std::exp(values.array().log().mean());
    } else {
        // Anchor at the entry whose ratio powers stay in (0, 1]: hi for q > 0,
        // lo for q < 0. mean((u/anchor)^q) then lies in (0, 1] and the final
        // root cannot overflow.
        if (q < 0.0 && lo <= 0.0)
            throw std::invalid_argument("power_mean: zero entry with q < 1");
        const double anchor = q > 0.0 ? hi : lo;
        if (anchor == 0.0) return 0.0;  // q >= 1 with an all-zero profile
        const double mean_ratio_pow = (values.array() / anchor).pow(q).mean();
        result = anchor * std::pow(mean_ratio_pow, 1.0 / q);
    }
    return std::clamp(result, lo, hi);
}

double gamma_factor(double epsilon, double a, double b, double q) {
    if (!is_finite_q(q))
        throw std::invalid_argument("gamma_factor: undefined for q = +-inf");
    if (!(epsilon > 0.0)) throw std::invalid_argument("gamma_factor: epsilon must be > 0");
    if (!(a < b)) throw std::invalid_argument("gamma_factor: need a < b");
    if (a < 0.0) throw std::invalid_argument("gamma_factor: need a >= 0");
    if (a == 0.0 && q != 1.0)
        throw std::invalid_argument("gamma_factor: a = 0 is only admitted for q = 1");

    if (q == 1.0) {
        const double d = b - a;
        return 1.0 / (d * d);
    }
    if (q == 0.0) {
        const double l = std::log(b / a);
        const double be = b + epsilon;
        return 1.0 / (be * be * l * l);
    }
    if (q < 0.0) {
        // (1-2^q)^2 b^(2q-2) / (a^q - b^q)^2, factored through r = b/a > 1 so
        // the powers stay bounded: (1-2^q)^2 r^(2q) / (b^2 (1 - r^q)^2).
        const double r = b / a;
        const double rq = std::pow(r, q);  // in (0, 1)
        const double c = 1.0 - std::pow(2.0, q);
        const double denom = b * (1.0 - rq);
        return c * c * rq * rq / (denom * denom);
    }
    // 0 < q < 1 and q > 1 share the shape q^2 a^(2q) / ((b + c*eps)^2 (b^q - a^q)^2)
    // with c = 1-q resp. q; factored through rho = a/b in (0, 1).
    const double rho = a / b;
    const double rhoq = std::pow(rho, q);
    const double c = q < 1.0 ? (1.0 - q) : q;
    const double be = b + c * epsilon;
    const double denom = be * (1.0 - rhoq);
    return q * q * rhoq * rhoq / (denom * denom);
}

double power_mean_concentration_bound(int n, int population, double epsilon,
                                      const WelfareConfig& config) {
    config.validate();
    if (n < 1 || n >= population)
        throw std::invalid_argument("power_mean_concentration_bound: need 1 <= n < N");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("power_mean_concentration_bound: epsilon must be > 0");

    const double frac = static_cast<double>(n) / static_cast<double>(population);
    if (!is_finite_q(config.q)) return 1.0 - frac;

    const double gamma = gamma_factor(epsilon, config.u_min, config.u_max, config.q);
    const int m = std::min(n, population - n);
    const double exponent =
        -2.0 * n * epsilon * epsilon * gamma / ((1.0 - frac) * (1.0 + 1.0 / m));
    return std::min(1.0, 2.0 * std::exp(exponent));
}

double hoeffding_serfling_bound(int n, int population, double epsilon, double a, double b) {
    if (n < 1 || n >= population)
        throw std::invalid_argument("hoeffding_serfling_bound: need 1 <= n < N");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("hoeffding_serfling_bound: epsilon must be > 0");
    if (a > b) throw std::invalid_argument("hoeffding_serfling_bound: need a <= b");
    if (a == b) return 0.0;  // constant population, deviation impossible

    const double frac = static_cast<double>(n) / static_cast<double>(population);
    const int m = std::min(n, population - n);
    const double range = b - a;
    const double exponent =
        -2.0 * epsilon * epsilon * n / ((1.0 - frac) * (1.0 + 1.0 / m) * range * range);
    return std::min(1.0, 2.0 * std::exp(exponent));
}

AssessorSet sample_assessors(int population, int n, std::uint64_t seed) {
    if (population < 1) throw std::invalid_argument("sample_assessors: empty society");
    if (n < 1 || n > population)
        throw std::invalid_argument("sample_assessors: need 1 <= n <= N");
    Prng rng(seed);
    AssessorSet set;
    set.society_size = population;
    set.indices = sample_without_replacement(population, n, rng);
    return set;
}

bool AdmissibleQ::contains(double q) const {
    if (impossible) return false;
    if (all_finite_reals && is_finite_q(q)) return true;
    for (double v : special_values) {
        if (is_pos_inf_q(v) && is_pos_inf_q(q)) return true;
        if (is_neg_inf_q(v) && is_neg_inf_q(q)) return true;
        if (is_finite_q(v) && v == q) return true;
    }
    return false;
}

std::string AdmissibleQ::describe() const {
    if (impossible) return "impossibility: no acceptable aggregation rule exists";
    std::string out;
    if (all_finite_reals) out = "all finite q";
    for (double v : special_values) {
        if (!out.empty()) out += ", ";
        if (is_pos_inf_q(v)) out += "+inf";
        else if (is_neg_inf_q(v)) out += "-inf";
        else out += std::to_string(v);
    }
    return "q in {" + out + "}";
}

AdmissibleQ allowed_q_for_basis(InformationalBasis basis) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    AdmissibleQ result;
    switch (basis) {
        case InformationalBasis::ONCI:
        case InformationalBasis::CNCI:
            result.impossible = true;
            break;
        case InformationalBasis::CUCI:
            result.special_values = {1.0};
            break;
        case InformationalBasis::OLCI:
            result.special_values = {-kInf, kInf};
            break;
        case InformationalBasis::CFCI:
            result.special_values = {-kInf, kInf, 1.0};
            break;
        case InformationalBasis::CRSI:
            result.all_finite_reals = true;
            result.special_values = {-kInf, kInf};
            break;
    }
    return result;
}

const char* to_string(InformationalBasis basis) {
    switch (basis) {
        case InformationalBasis::ONCI: return "ONCI";
        case InformationalBasis::CNCI: return "CNCI";
        case InformationalBasis::CUCI: return "CUCI";
        case InformationalBasis::OLCI: return "OLCI";
        case InformationalBasis::CFCI: return "CFCI";
        case InformationalBasis::CRSI: return "CRSI";
    }
    return "?";
}

}  // namespace paa
