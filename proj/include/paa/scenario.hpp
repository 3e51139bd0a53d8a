#ifndef PAA_SCENARIO_HPP
#define PAA_SCENARIO_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "paa/planner.hpp"
#include "paa/smdp.hpp"

namespace paa {

// A scenario file is a schema-versioned JSON document holding either an
// explicit model (kernel row-major [s][a][s'], utilities [i][s]) or a
// generator block, plus the welfare rule, discount, optional model-error and
// tolerance blocks. Numbers are decimal literals; q accepts "inf"/"-inf".
struct GeneratorSpec {
    int num_states = 2;
    int num_actions = 2;
    int num_individuals = 1;
    double utility_low = 0.0;
    double utility_high = 1.0;
};

struct ModelErrorSpec {
    PerturbMode mode = PerturbMode::kUniformMixture;
    double lambda = 0.0;
};

struct PlannerBlock {
    double epsilon = 0.1;
    std::optional<double> delta;
    std::optional<PlannerParams> params;  // explicit desk-scale resources
};

struct SafeguardBlock {
    double omega = 0.0;
    double delta = 0.1;
    PlannerParams params;
};

struct Scenario {
    int schema = 1;
    std::uint64_t seed = 0;
    WelfareConfig welfare;
    double gamma = 0.9;
    std::optional<GeneratorSpec> generator;
    // Explicit model fields, set when no generator is present.
    std::optional<TransitionKernel> kernel;
    std::optional<Eigen::MatrixXd> utilities;
    std::optional<ModelErrorSpec> model_error;
    std::optional<PlannerBlock> planner;
    std::optional<SafeguardBlock> safeguard;
    std::string notes;

    // Materializes the SMDP (running the generator if present) and the model
    // pair (exact unless a model_error block asks for a perturbation).
    Smdp build_model() const;
    ModelPair build_pair(const Smdp& model) const;
};

// Parse and validate a scenario document; semantic errors carry the offending
// field path. Warnings (e.g. renormalized kernel rows) go to `warn`.
Scenario parse_scenario(const std::string& json_text,
                        const std::function<void(const std::string&)>& warn = nullptr);
Scenario load_scenario(const std::string& path,
                       const std::function<void(const std::string&)>& warn = nullptr);

std::string scenario_to_json(const Scenario& scenario);

// Seeded random dense SMDP: kernel rows are normalized uniform draws,
// utilities uniform in [low, high].
Smdp generate_model(const GeneratorSpec& spec, const WelfareConfig& welfare, double gamma,
                    std::uint64_t seed);

// The 4-state trap construction: a start state offering a safe action into an
// absorbing high-welfare state and a trap action into a state that glitters at
// u_max once, then sinks to perpetual u_min. Thresholds are derived from the
// exact oracle and the filter's alpha at the pinned resources (d = 0,
// K = C = 256, n = N, H = 3) and embedded in `notes`.
Scenario make_trap_scenario();

// Quantities the trap construction derives; exposed so the verification suite
// can assert the geometry rather than assume it.
struct TrapGeometry {
    double alpha = 0.0;
    double threshold = 0.0;       // gamma*omega + u_max + alpha
    double omega = 0.0;
    double q_star_safe = 0.0;     // Q*(start, safe)
    double q_star_trap = 0.0;     // Q*(start, trap)
    double q_h_safe = 0.0;        // exact depth-H backup of the safe action
    double q_h_trap = 0.0;
    double margin_safe = 0.0;     // q_h_safe - threshold
    double margin_trap = 0.0;     // threshold - max(q_star_trap, q_h_trap)
    double v_trap_successor = 0.0;
    int safe_action = 0;
    int trap_action = 1;
};
TrapGeometry derive_trap_geometry(const Smdp& model, const SafeguardBlock& block);

}  // namespace paa

#endif  // PAA_SCENARIO_HPP
