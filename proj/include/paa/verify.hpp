#ifndef PAA_VERIFY_HPP
#define PAA_VERIFY_HPP

#include <string>
#include <vector>

namespace paa {

// One verified sub-case: `observed` must not exceed `limit` (or, for equality
// style checks, `observed` is the defect count and `limit` its allowance).
struct CaseResult {
    std::string id;
    double observed = 0.0;
    double limit = 0.0;
    bool pass = false;
    bool informational = false;  // reported but not gating
};

struct SuiteReport {
    std::string suite;
    bool pass = true;
    double seconds = 0.0;
    std::vector<CaseResult> cases;

    void add(const std::string& id, double observed, double limit, bool ok,
             bool informational = false);
    int failures() const;
    std::string to_json() const;
};

// Empirical-soundness suites with pinned seeds and tolerances. Each suite
// realizes one acceptance criterion; `planner` and `safeguard` bundle three
// resp. two of them.
SuiteReport run_lemma1_suite();               // MC welfare == policy evaluation
SuiteReport run_lemma2_suite();               // power-mean concentration bound
SuiteReport run_lemma3_suite();               // KL expectation-gap inequality
SuiteReport run_lemma5_suite();               // Hoeffding-Serfling bound
SuiteReport run_planner_degeneration_suite(); // q_hat == exact backup, K=C=1
SuiteReport run_planner_soundness_suite();    // |Q* - Q_hat| vs (alpha_H, phi_H)
SuiteReport run_param_replay_suite();         // calculators re-substituted
SuiteReport run_trap_suite();                 // safeguard on the trap scenario
SuiteReport run_eq7_suite();                  // restricted-policy validity

// name in {lemma1, lemma2, lemma3, lemma5, planner, safeguard, all}.
std::vector<SuiteReport> run_suites(const std::string& name);

}  // namespace paa

#endif  // PAA_VERIFY_HPP
