#pragma once
// Command-line front end for the check registry: configuration parsing, a small
// worker pool, and the JSON report.
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlink/verify.hpp"

namespace qlink {

struct RunConfig {
    double q = 0.5;
    int n_cut = 24;
    int z_lo = -12;
    int z_hi = 12;
    std::map<std::string, double> tol_overrides;
    std::vector<std::string> suite;  // empty means every registered check
    std::uint64_t seed = 42;
    int workers = 1;
    std::string report_path;
    bool list = false;

    void validate() const {
        if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::UsageError, "--q must lie in (0,1)");
        if (n_cut < 8) throw Error(ErrorCode::UsageError, "--n-cut must be at least 8");
        if (z_hi - z_lo < 8) throw Error(ErrorCode::UsageError, "--z-hi minus --z-lo must be at least 8");
        if (workers < 1) throw Error(ErrorCode::UsageError, "--workers must be at least 1");
        for (const auto& id : suite)
            if (!find_check(id)) throw Error(ErrorCode::UsageError, "--suite names an unknown check: " + id);
        for (const auto& [id, v] : tol_overrides) {
            if (!find_check(id)) throw Error(ErrorCode::UsageError, "--tol names an unknown check: " + id);
            if (!std::isfinite(v) || v < 0) throw Error(ErrorCode::UsageError, "--tol value must be a non-negative number");
        }
    }

    Window window() const {
        Window w;
        w.n_cut = n_cut;
        w.z_lo = z_lo;
        w.z_hi = z_hi;
        w.interior_margin = std::min({8, n_cut / 3, (z_hi - z_lo) / 3});
        return w;
    }

    CheckConfig check_config() const {
        CheckConfig c;
        c.q = q;
        c.window = window();
        c.seed = seed;
        c.tol = tol_overrides;
        return c;
    }

    std::vector<std::string> selected() const {
        if (!suite.empty()) return suite;
        std::vector<std::string> all;
        for (const auto& c : check_registry()) all.push_back(c.id);
        return all;
    }

    json to_json() const {
        json t = json::object();
        for (const auto& [k, v] : tol_overrides) t[k] = v;
        return {{"q", q},        {"n_cut", n_cut}, {"z_lo", z_lo},       {"z_hi", z_hi},
                {"tol", t},      {"suite", selected()}, {"seed", seed}, {"workers", workers},
                {"report", report_path}};
    }
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline std::vector<std::string> suite_from(const std::string& s) {
    if (s == "all") return {};
    std::vector<std::string> v = split_csv(s);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline std::pair<std::string, double> parse_tol(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::UsageError, "--tol expects <check>=<value>, got " + s);
    try {
        std::size_t used = 0;
        double v = std::stod(s.substr(eq + 1), &used);
        if (used != s.size() - eq - 1) throw std::invalid_argument("trailing");
        return {s.substr(0, eq), v};
    } catch (const std::exception&) {
        throw Error(ErrorCode::UsageError, "--tol value is not a number: " + s);
    }
}

// Applies the keys of a flat JSON object that were not given on the command line.
inline void apply_config_file(RunConfig& cfg, const std::string& path, const std::set<std::string>& from_flags) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::UsageError, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::UsageError, "config file must hold a flat JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (from_flags.count(k)) continue;
            if (k == "q")
                cfg.q = v.get<double>();
            else if (k == "n_cut")
                cfg.n_cut = v.get<int>();
            else if (k == "z_lo")
                cfg.z_lo = v.get<int>();
            else if (k == "z_hi")
                cfg.z_hi = v.get<int>();
            else if (k == "seed")
                cfg.seed = v.get<std::uint64_t>();
            else if (k == "workers")
                cfg.workers = v.get<int>();
            else if (k == "report")
                cfg.report_path = v.get<std::string>();
            else if (k == "suite")
                cfg.suite = v.is_array() ? suite_from([&] {
                    std::string s;
                    for (const auto& x : v) s += x.get<std::string>() + ",";
                    return s;
                }())
                                         : suite_from(v.get<std::string>());
            else if (k == "tol") {
                for (auto t = v.begin(); t != v.end(); ++t) cfg.tol_overrides[t.key()] = t.value().get<double>();
            } else
                throw Error(ErrorCode::UsageError, "unknown key in config file: " + k);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::UsageError, std::string("config file has a value of the wrong type: ") + e.what());
    }
}

}  // namespace detail

// Flags override config-file values, which override defaults. Throws Error with
// UsageError or IOError; CLI11's help request is passed through as CLI::CallForHelp.
inline RunConfig parse_config(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Numerical verification of the coefficient and operator identities"};
    std::string suite = "all", config_path;
    std::vector<std::string> tols;
    app.add_option("--q", cfg.q, "deformation parameter in (0,1)");
    app.add_option("--n-cut", cfg.n_cut, "cut-off for N-indexed legs (>= 8)");
    app.add_option("--z-lo", cfg.z_lo, "lower bound for Z-indexed legs");
    app.add_option("--z-hi", cfg.z_hi, "upper bound for Z-indexed legs");
    app.add_option("--tol", tols, "tolerance override <check>=<value>, repeatable");
    app.add_option("--suite", suite, "comma-separated check ids, or all");
    app.add_option("--seed", cfg.seed, "seed for sampled checks");
    app.add_option("--workers", cfg.workers, "number of worker threads");
    app.add_option("--report", cfg.report_path, "write the JSON report to this path");
    app.add_option("--config", config_path, "flat JSON file with the same keys");
    app.add_flag("--list", cfg.list, "print the check ids with a description and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw;
    } catch (const CLI::ParseError& e) {
        throw Error(ErrorCode::UsageError, e.what());
    }
    cfg.suite = detail::suite_from(suite);
    for (const auto& t : tols) {
        auto [id, v] = detail::parse_tol(t);
        cfg.tol_overrides.insert_or_assign(id, v);
    }

    if (!config_path.empty()) {
        std::set<std::string> given;
        const std::pair<const char*, const char*> names[] = {{"--q", "q"},         {"--n-cut", "n_cut"}, {"--z-lo", "z_lo"},
                                                             {"--z-hi", "z_hi"},   {"--seed", "seed"},   {"--workers", "workers"},
                                                             {"--report", "report"}, {"--suite", "suite"}};
        for (auto [flag, key] : names)
            if (app.count(flag)) given.insert(key);
        RunConfig flags = cfg;
        detail::apply_config_file(cfg, config_path, given);
        // tolerance overrides merge, with the flag value winning per check
        for (const auto& [k, v] : flags.tol_overrides) cfg.tol_overrides[k] = v;
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"qlink_verify"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_config(static_cast<int>(argv.size()), argv.data());
}

inline void print_check_list(std::ostream& out) {
    std::size_t w = 0;
    for (const auto& c : check_registry()) w = std::max(w, c.id.size());
    for (const auto& c : check_registry())
        out << std::left << std::setw(static_cast<int>(w + 2)) << c.id << c.description << "\n";
}

// Runs the selected checks on `workers` threads; results come back in check_id order.
inline std::vector<CheckReport> run_checks(const RunConfig& cfg) {
    const std::vector<std::string> ids = cfg.selected();
    const CheckConfig cc = cfg.check_config();
    std::vector<CheckReport> out(ids.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < ids.size(); i = next++) out[i] = run_check(ids[i], cc);
    };
    const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(ids.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::stable_sort(out.begin(), out.end(), [](const CheckReport& a, const CheckReport& b) {
        return a.check_id != b.check_id ? a.check_id < b.check_id : a.params.dump() < b.params.dump();
    });
    return out;
}

inline json build_report(const RunConfig& cfg, const std::vector<CheckReport>& reports) {
    json arr = json::array();
    int passed = 0;
    for (const auto& r : reports) {
        arr.push_back(to_json(r));
        passed += r.pass ? 1 : 0;
    }
    const int total = static_cast<int>(reports.size());
    return {{"config", cfg.to_json()},
            {"reports", arr},
            {"summary", {{"passed", passed}, {"failed", total - passed}, {"total", total}}}};
}

inline std::string summary_line(const CheckReport& r) {
    std::ostringstream s;
    s << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(26) << r.check_id << " metric=" << std::setprecision(3)
      << std::scientific << r.metric << (r.relation == "ge" ? " >= " : " <= ") << r.tolerance << "  (" << r.runtime_ms
      << " ms)";
    if (!r.notes.empty()) s << "  " << r.notes;
    return s.str();
}

// Exit code 0 when every check passes, 1 when one fails, 2 on configuration or IO errors.
inline int run_suite(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        cfg.validate();
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
    std::ofstream report;
    if (!cfg.report_path.empty()) {
        report.open(cfg.report_path, std::ios::out | std::ios::trunc);
        if (!report) {
            err << "IOError: cannot write report to " << cfg.report_path << "\n";
            return 2;
        }
    }
    const auto reports = run_checks(cfg);
    bool all = true;
    for (const auto& r : reports) {
        out << summary_line(r) << "\n";
        all = all && r.pass;
    }
    if (report.is_open()) {
        report << build_report(cfg, reports).dump(2) << "\n";
        report.flush();
        if (!report) {
            err << "IOError: failed while writing " << cfg.report_path << "\n";
            return 2;
        }
    }
    return all ? 0 : 1;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    try {
        cfg = parse_config(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << "usage: qlink_verify [--q Q] [--n-cut N] [--z-lo Z] [--z-hi Z] [--tol ID=V]... [--suite IDS|all]\n"
               "                    [--seed S] [--workers W] [--report PATH] [--config FILE] [--list]\n";
        return 0;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 2;
    }
    if (cfg.list) {
        print_check_list(out);
        return 0;
    }
    return run_suite(cfg, out, err);
}

}  // namespace qlink
