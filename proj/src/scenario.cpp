#include "paa/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "paa/oracle.hpp"
#include "paa/safeguard.hpp"

namespace paa {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error("scenario: " + path + ": " + msg);
}

double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

// q is an extended real: a JSON number, or "inf" / "+inf" / "-inf".
double parse_q(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        fail(path, "unrecognized q literal '" + s + "'");
    }
    fail(path, "expected a number or inf literal");
}

json q_to_json(double q) {
    if (is_pos_inf_q(q)) return "inf";
    if (is_neg_inf_q(q)) return "-inf";
    return q;
}

PlannerParams parse_params(const json& j, const std::string& path) {
    PlannerParams p;
    p.depth = j.value("depth", std::int64_t{1});
    p.reward_samples = j.value("reward_samples", std::int64_t{1});
    p.child_samples = j.value("child_samples", std::int64_t{1});
    p.assessors = j.value("assessors", std::int64_t{1});
    if (p.depth < 1 || p.reward_samples < 1 || p.child_samples < 1 || p.assessors < 1)
        fail(path, "depth, reward_samples, child_samples, assessors must all be >= 1");
    return p;
}

json params_to_json(const PlannerParams& p) {
    return json{{"depth", p.depth},
                {"reward_samples", p.reward_samples},
                {"child_samples", p.child_samples},
                {"assessors", p.assessors}};
}

}  // namespace

Scenario parse_scenario(const std::string& json_text,
                        const std::function<void(const std::string&)>& warn) {
    json doc;
    try {
        doc = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("scenario: JSON parse error: ") + e.what());
    }

    Scenario sc;
    if (!doc.contains("schema") || !doc["schema"].is_number_integer())
        fail("schema", "missing integer schema field");
    sc.schema = doc["schema"].get<int>();
    if (sc.schema != 1) fail("schema", "unsupported schema version " + std::to_string(sc.schema));

    sc.seed = doc.value("seed", std::uint64_t{0});

    if (!doc.contains("welfare")) fail("welfare", "missing");
    const json& w = doc["welfare"];
    sc.welfare.q = parse_q(w.contains("q") ? w["q"] : json(1.0), "welfare.q");
    sc.welfare.u_min = number_at(w.contains("u_min") ? w["u_min"] : json(0.0), "welfare.u_min");
    sc.welfare.u_max = number_at(w.contains("u_max") ? w["u_max"] : json(1.0), "welfare.u_max");
    try {
        sc.welfare.validate();
    } catch (const std::exception& e) {
        fail("welfare", e.what());
    }

    if (!doc.contains("gamma")) fail("gamma", "missing");
    sc.gamma = number_at(doc["gamma"], "gamma");
    if (!(sc.gamma >= 0.0 && sc.gamma < 1.0)) fail("gamma", "must lie in [0, 1)");

    if (!doc.contains("model") || !doc["model"].is_object()) fail("model", "missing object");
    const json& model = doc["model"];
    const bool has_explicit = model.contains("explicit");
    const bool has_generator = model.contains("generator");
    if (has_explicit == has_generator)
        fail("model", "exactly one of 'explicit' or 'generator' is required");

    if (has_generator) {
        const json& g = model["generator"];
        GeneratorSpec spec;
        spec.num_states = g.value("num_states", 2);
        spec.num_actions = g.value("num_actions", 2);
        spec.num_individuals = g.value("num_individuals", 1);
        if (g.contains("utility_range")) {
            const json& r = g["utility_range"];
            if (!r.is_array() || r.size() != 2)
                fail("model.generator.utility_range", "expected [low, high]");
            spec.utility_low = number_at(r[0], "model.generator.utility_range[0]");
            spec.utility_high = number_at(r[1], "model.generator.utility_range[1]");
        } else {
            spec.utility_low = sc.welfare.u_min;
            spec.utility_high = sc.welfare.u_max;
        }
        if (spec.num_states < 1 || spec.num_actions < 1 || spec.num_individuals < 1)
            fail("model.generator", "sizes must be >= 1");
        if (spec.utility_low > spec.utility_high ||
            spec.utility_low < sc.welfare.u_min - 1e-12 ||
            spec.utility_high > sc.welfare.u_max + 1e-12)
            fail("model.generator.utility_range", "must lie within the welfare bounds");
        sc.generator = spec;
    } else {
        const json& e = model["explicit"];
        const int S = e.value("num_states", 0);
        const int A = e.value("num_actions", 0);
        if (S < 1 || A < 1) fail("model.explicit", "num_states and num_actions must be >= 1");
        if (!e.contains("kernel") || !e["kernel"].is_array() ||
            static_cast<int>(e["kernel"].size()) != S)
            fail("model.explicit.kernel", "expected " + std::to_string(S) + " state entries");
        TransitionKernel kernel(S, A);
        for (int s = 0; s < S; ++s) {
            const json& rows = e["kernel"][static_cast<std::size_t>(s)];
            if (!rows.is_array() || static_cast<int>(rows.size()) != A)
                fail("model.explicit.kernel[" + std::to_string(s) + "]",
                     "expected " + std::to_string(A) + " action rows");
            for (int a = 0; a < A; ++a) {
                const json& row = rows[static_cast<std::size_t>(a)];
                if (!row.is_array() || static_cast<int>(row.size()) != S)
                    fail("model.explicit.kernel[" + std::to_string(s) + "][" + std::to_string(a) +
                             "]",
                         "expected " + std::to_string(S) + " probabilities");
                Eigen::VectorXd p(S);
                for (int sp = 0; sp < S; ++sp)
                    p[sp] = number_at(row[static_cast<std::size_t>(sp)],
                                      "model.explicit.kernel[" + std::to_string(s) + "][" +
                                          std::to_string(a) + "][" + std::to_string(sp) + "]");
                kernel.set_row(s, a, p);
            }
        }
        try {
            kernel.normalize(warn);
        } catch (const std::exception& ex) {
            fail("model.explicit.kernel", ex.what());
        }

        if (!e.contains("utilities") || !e["utilities"].is_array() || e["utilities"].empty())
            fail("model.explicit.utilities", "expected a nonempty [individual][state] matrix");
        const int N = static_cast<int>(e["utilities"].size());
        Eigen::MatrixXd utilities(N, S);
        for (int i = 0; i < N; ++i) {
            const json& row = e["utilities"][static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != S)
                fail("model.explicit.utilities[" + std::to_string(i) + "]",
                     "expected " + std::to_string(S) + " values");
            for (int s = 0; s < S; ++s) {
                const double u = number_at(row[static_cast<std::size_t>(s)],
                                           "model.explicit.utilities[" + std::to_string(i) + "][" +
                                               std::to_string(s) + "]");
                if (u < sc.welfare.u_min - 1e-12 || u > sc.welfare.u_max + 1e-12)
                    fail("model.explicit.utilities[" + std::to_string(i) + "][" +
                             std::to_string(s) + "]",
                         "outside the welfare bounds");
                utilities(i, s) = u;
            }
        }
        sc.kernel = std::move(kernel);
        sc.utilities = std::move(utilities);
    }

    if (doc.contains("model_error")) {
        const json& me = doc["model_error"];
        ModelErrorSpec spec;
        const std::string mode = me.value("mode", std::string("uniform_mixture"));
        if (mode != "uniform_mixture") fail("model_error.mode", "unknown mode '" + mode + "'");
        spec.lambda = number_at(me.contains("lambda") ? me["lambda"] : json(0.0),
                                "model_error.lambda");
        if (!(spec.lambda >= 0.0 && spec.lambda <= 1.0))
            fail("model_error.lambda", "must lie in [0, 1]");
        sc.model_error = spec;
    }

    if (doc.contains("planner")) {
        const json& p = doc["planner"];
        PlannerBlock block;
        block.epsilon = number_at(p.contains("epsilon") ? p["epsilon"] : json(0.1),
                                  "planner.epsilon");
        if (!(block.epsilon > 0.0)) fail("planner.epsilon", "must be > 0");
        if (p.contains("delta")) {
            block.delta = number_at(p["delta"], "planner.delta");
            if (!(*block.delta > 0.0 && *block.delta < 1.0))
                fail("planner.delta", "must lie in (0, 1)");
        }
        if (p.contains("params")) block.params = parse_params(p["params"], "planner.params");
        sc.planner = block;
    }

    if (doc.contains("safeguard")) {
        const json& s = doc["safeguard"];
        SafeguardBlock block;
        if (!s.contains("omega")) fail("safeguard.omega", "missing");
        block.omega = number_at(s["omega"], "safeguard.omega");
        block.delta = number_at(s.contains("delta") ? s["delta"] : json(0.1), "safeguard.delta");
        if (!(block.delta > 0.0 && block.delta < 1.0)) fail("safeguard.delta", "must lie in (0, 1)");
        if (!s.contains("params")) fail("safeguard.params", "missing");
        block.params = parse_params(s["params"], "safeguard.params");
        sc.safeguard = block;
    }

    if (doc.contains("notes") && doc["notes"].is_string())
        sc.notes = doc["notes"].get<std::string>();
    return sc;
}

Scenario load_scenario(const std::string& path,
                       const std::function<void(const std::string&)>& warn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), warn);
}

std::string scenario_to_json(const Scenario& sc) {
    json doc;
    doc["schema"] = sc.schema;
    doc["seed"] = sc.seed;
    doc["welfare"] = {{"q", q_to_json(sc.welfare.q)},
                      {"u_min", sc.welfare.u_min},
                      {"u_max", sc.welfare.u_max}};
    doc["gamma"] = sc.gamma;
    if (sc.generator) {
        doc["model"]["generator"] = {
            {"num_states", sc.generator->num_states},
            {"num_actions", sc.generator->num_actions},
            {"num_individuals", sc.generator->num_individuals},
            {"utility_range", {sc.generator->utility_low, sc.generator->utility_high}}};
    } else if (sc.kernel && sc.utilities) {
        const TransitionKernel& kernel = *sc.kernel;
        const int S = kernel.num_states(), A = kernel.num_actions();
        json ks = json::array();
        for (int s = 0; s < S; ++s) {
            json as = json::array();
            for (int a = 0; a < A; ++a) {
                json row = json::array();
                for (int sp = 0; sp < S; ++sp) row.push_back(kernel.row(s, a)[sp]);
                as.push_back(std::move(row));
            }
            ks.push_back(std::move(as));
        }
        json us = json::array();
        for (Eigen::Index i = 0; i < sc.utilities->rows(); ++i) {
            json row = json::array();
            for (int s = 0; s < S; ++s) row.push_back((*sc.utilities)(i, s));
            us.push_back(std::move(row));
        }
        doc["model"]["explicit"] = {{"num_states", S},
                                    {"num_actions", A},
                                    {"kernel", std::move(ks)},
                                    {"utilities", std::move(us)}};
    }
    if (sc.model_error)
        doc["model_error"] = {{"mode", "uniform_mixture"}, {"lambda", sc.model_error->lambda}};
    if (sc.planner) {
        doc["planner"]["epsilon"] = sc.planner->epsilon;
        if (sc.planner->delta) doc["planner"]["delta"] = *sc.planner->delta;
        if (sc.planner->params) doc["planner"]["params"] = params_to_json(*sc.planner->params);
    }
    if (sc.safeguard) {
        doc["safeguard"] = {{"omega", sc.safeguard->omega},
                            {"delta", sc.safeguard->delta},
                            {"params", params_to_json(sc.safeguard->params)}};
    }
    if (!sc.notes.empty()) doc["notes"] = sc.notes;
    return doc.dump(2) + "\n";
}

Smdp generate_model(const GeneratorSpec& spec, const WelfareConfig& welfare, double gamma,
                    std::uint64_t seed) {
    TransitionKernel kernel(spec.num_states, spec.num_actions);
    Prng kernel_rng(derive_seed(seed, {0x6b65726eull}));  // "kern"
    Eigen::VectorXd row(spec.num_states);
    for (int s = 0; s < spec.num_states; ++s) {
        for (int a = 0; a < spec.num_actions; ++a) {
            for (int sp = 0; sp < spec.num_states; ++sp)
                row[sp] = 0.05 + kernel_rng.next_unit();
            kernel.set_row(s, a, row / row.sum());
        }
    }
    Prng util_rng(derive_seed(seed, {0x7574696cull}));  // "util"
    Eigen::MatrixXd utilities(spec.num_individuals, spec.num_states);
    for (int i = 0; i < spec.num_individuals; ++i)
        for (int s = 0; s < spec.num_states; ++s)
            utilities(i, s) = util_rng.next_uniform(spec.utility_low, spec.utility_high);
    return Smdp(std::move(kernel), std::move(utilities), welfare, gamma);
}

Smdp Scenario::build_model() const {
    if (generator) return generate_model(*generator, welfare, gamma, seed);
    return Smdp(*kernel, *utilities, welfare, gamma);
}

ModelPair Scenario::build_pair(const Smdp& model) const {
    if (model_error && model_error->lambda > 0.0)
        return perturb_kernel(model.kernel(), model_error->lambda, model_error->mode);
    return exact_model_pair(model.kernel());
}

TrapGeometry derive_trap_geometry(const Smdp& model, const SafeguardBlock& block) {
    TrapGeometry geo;
    geo.safe_action = 0;
    geo.trap_action = 1;

    const ValueTable table = value_iteration(model, 1e-12);
    geo.q_star_safe = table.q(0, geo.safe_action);
    geo.q_star_trap = table.q(0, geo.trap_action);
    geo.v_trap_successor = model.kernel().row(0, geo.trap_action).dot(table.v);

    geo.alpha = alpha_threshold(0.0, model.num_individuals(), block.params.assessors,
                                block.params.reward_samples, block.params.child_samples,
                                block.params.depth, model.gamma(), model.welfare(), block.delta,
                                model.num_actions());
    geo.omega = block.omega;
    geo.threshold = model.gamma() * block.omega + model.welfare().u_max + geo.alpha;

    // Exact depth-H backup (the kernel is deterministic, so the planner's
    // estimate coincides with this up to summation rounding).
    std::function<double(int, int, std::int64_t)> backup = [&](int s, int a,
                                                               std::int64_t h) -> double {
        if (h == 0) return 0.0;
        const double r = true_reward(model, s, a);
        if (h == 1) return r;
        double expected = 0.0;
        for (int sp = 0; sp < model.num_states(); ++sp) {
            const double p = model.kernel().row(s, a)[sp];
            if (p == 0.0) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int ap = 0; ap < model.num_actions(); ++ap)
                best = std::max(best, backup(sp, ap, h - 1));
            expected += p * best;
        }
        return r + model.gamma() * expected;
    };
    geo.q_h_safe = backup(0, geo.safe_action, block.params.depth);
    geo.q_h_trap = backup(0, geo.trap_action, block.params.depth);
    geo.margin_safe = geo.q_h_safe - geo.threshold;
    geo.margin_trap = geo.threshold - std::max(geo.q_star_trap, geo.q_h_trap);
    return geo;
}

Scenario make_trap_scenario() {
    // Geometry pinned by the filter resources K = C = 256, H = 3: at
    // gamma = 0.32 and delta = 0.9 the exact depth-3 value of the safe path,
    // u_max (1 + gamma + gamma^2), clears gamma*omega + u_max + alpha with a
    // small positive derived margin, while the trap path sits far below.
    constexpr double kGamma = 0.32;
    constexpr double kUmin = 0.001;
    constexpr double kUmax = 1.0;
    constexpr int kStates = 4;   // 0 start, 1 good, 2 trap, 3 sink
    constexpr int kActions = 2;  // 0 safe, 1 trap
    constexpr int kSociety = 5;

    Scenario sc;
    sc.schema = 1;
    sc.seed = 20240811;
    sc.welfare = WelfareConfig{1.0, kUmin, kUmax};
    sc.gamma = kGamma;

    TransitionKernel kernel(kStates, kActions);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(kStates);
    auto to = [&](int target) {
        row.setZero();
        row[target] = 1.0;
        return row;
    };
    kernel.set_row(0, 0, to(1));  // safe: start -> good
    kernel.set_row(0, 1, to(2));  // trap: start -> glitter
    kernel.set_row(1, 0, to(1));  // good absorbs
    kernel.set_row(1, 1, to(1));
    kernel.set_row(2, 0, to(3));  // glitter decays into the sink
    kernel.set_row(2, 1, to(3));
    kernel.set_row(3, 0, to(3));  // sink absorbs
    kernel.set_row(3, 1, to(3));

    Eigen::MatrixXd utilities(kSociety, kStates);
    for (int i = 0; i < kSociety; ++i) {
        utilities(i, 0) = 0.5;
        utilities(i, 1) = kUmax;  // good state pays the ceiling forever
        utilities(i, 2) = kUmax;  // the trap glitters at u_max once
        utilities(i, 3) = kUmin;  // then perpetual u_min
    }

    SafeguardBlock block;
    block.delta = 0.9;
    block.params.depth = 3;
    block.params.reward_samples = 256;
    block.params.child_samples = 256;
    block.params.assessors = kSociety;

    Smdp model(kernel, utilities, sc.welfare, sc.gamma);

    // Derive omega: it must exceed the trap successor's optimal value (so the
    // trap is genuinely destructive) while keeping the threshold below the
    // exact depth-H value of the safe action.
    block.omega = model.min_value();  // provisional, replaced below
    TrapGeometry geo = derive_trap_geometry(model, block);
    const double lo = std::max(geo.v_trap_successor, model.min_value());
    const double hi = (geo.q_h_safe - model.welfare().u_max - geo.alpha) / model.gamma();
    if (!(hi > lo))
        throw std::runtime_error("make_trap_scenario: derived omega window is empty");
    block.omega = lo + 0.5 * (hi - lo);

    geo = derive_trap_geometry(model, block);
    std::ostringstream notes;
    notes.precision(12);
    notes << "derived: alpha=" << geo.alpha << " threshold=" << geo.threshold
          << " omega=" << geo.omega << " Qstar_safe=" << geo.q_star_safe
          << " Qstar_trap=" << geo.q_star_trap << " QH_safe=" << geo.q_h_safe
          << " QH_trap=" << geo.q_h_trap << " margin_safe=" << geo.margin_safe
          << " margin_trap=" << geo.margin_trap;

    sc.kernel = std::move(kernel);
    sc.utilities = std::move(utilities);
    sc.safeguard = block;
    sc.notes = notes.str();
    return sc;
}

}  // namespace paa
