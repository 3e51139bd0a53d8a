#include "paa/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace paa {

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

void RunReport::add(std::optional<int> state, std::optional<int> action, std::string metric,
                    double value, std::uint64_t seed) {
    rows.push_back(ReportRow{state, action, std::move(metric), value, seed});
}

void write_csv(const RunReport& report, std::ostream& out) {
    out << "# generated_at=" << timestamp() << "\n";
    out << "run_id,state,action,metric,value,seed\n";
    for (const ReportRow& row : report.rows) {
        out << report.run_id << ',';
        if (row.state) out << *row.state;
        out << ',';
        if (row.action) out << *row.action;
        out << ',' << row.metric << ',' << format_value(row.value) << ',' << row.seed << "\n";
    }
}

void write_json(const RunReport& report, std::ostream& out) {
    nlohmann::json doc;
    doc["generated_at"] = timestamp();
    doc["run_id"] = report.run_id;
    doc["master_seed"] = report.master_seed;
    doc["realized_d"] = report.realized_d;
    doc["wall_clock_seconds"] = report.wall_clock_seconds;
    nlohmann::json rows = nlohmann::json::array();
    for (const ReportRow& row : report.rows) {
        nlohmann::json r;
        if (row.state) r["state"] = *row.state;
        if (row.action) r["action"] = *row.action;
        r["metric"] = row.metric;
        r["value"] = row.value;
        r["seed"] = row.seed;
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << "\n";
}

void write_report(const RunReport& report, const std::string& format, std::ostream& out) {
    if (format == "csv") {
        write_csv(report, out);
    } else if (format == "json") {
        write_json(report, out);
    } else {
        throw std::runtime_error("unknown report format '" + format + "' (expected csv or json)");
    }
}

void write_report_file(const RunReport& report, const std::string& format,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report file '" + path + "'");
    write_report(report, format, out);
}

}  // namespace paa
