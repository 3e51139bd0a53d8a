#ifndef PAA_REPORT_HPP
#define PAA_REPORT_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace paa {

// One long-format record: state/action are optional (absent for aggregate
// metrics), value printed with full precision.
struct ReportRow {
    std::optional<int> state;
    std::optional<int> action;
    std::string metric;
    double value = 0.0;
    std::uint64_t seed = 0;
};

// Deterministic body given (scenario, master seed); the only
// non-reproducible content is the timestamp header line, which both writers
// isolate so byte comparison of bodies stays meaningful.
struct RunReport {
    std::string run_id;
    std::uint64_t master_seed = 0;
    double realized_d = 0.0;
    double wall_clock_seconds = 0.0;
    std::vector<ReportRow> rows;

    void add(std::optional<int> state, std::optional<int> action, std::string metric, double value,
             std::uint64_t seed = 0);
};

// CSV: one `# generated_at=...` header line, then
// run_id,state,action,metric,value,seed with %.17g values.
void write_csv(const RunReport& report, std::ostream& out);

// JSON object with the same rows; the timestamp is a separate top-level field.
void write_json(const RunReport& report, std::ostream& out);

void write_report(const RunReport& report, const std::string& format, std::ostream& out);
void write_report_file(const RunReport& report, const std::string& format,
                       const std::string& path);

}  // namespace paa

#endif  // PAA_REPORT_HPP
