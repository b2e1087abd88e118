#include "gnep/run.hpp"

#include "gnep/plugin.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

namespace gnep {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw UsageError("invalid number for '" + key + "': '" + text + "'");
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw UsageError("invalid integer for '" + key + "': '" + text + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw UsageError("empty list for '" + key + "'");
    return out;
}

std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1e", v);
    return buf;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct LoadedProblem {
    GnepProblem problem;
    std::map<std::string, Vector> presets;
};

LoadedProblem load(const RunConfig& config) {
    if (config.problem.empty()) throw UsageError("no problem given (use --problem)");
    if (auto entry = find_in_catalog(config.problem, config.seed))
        return {std::move(entry->problem), std::move(entry->presets)};
    if (!fs::is_regular_file(config.problem))
        throw UsageError("unknown problem '" + config.problem +
                         "' (neither a catalog name nor a readable file)");
    PluginProblem plugin = [&] {
        try {
            return load_problem_plugin(config.problem);
        } catch (const ParseError& e) {
            throw UsageError(e.what());
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }();
    const auto n = static_cast<Eigen::Index>(plugin.problem.dim());
    std::map<std::string, Vector> presets = {{"zero", Vector::Zero(n)},
                                             {"ones", Vector::Ones(n)},
                                             {"tens", Vector::Constant(n, 10.0)}};
    for (auto& [k, v] : plugin.presets) presets[k] = v;
    return {std::move(plugin.problem), std::move(presets)};
}

std::pair<Vector, std::string> resolve_x0(const RunConfig& config, const LoadedProblem& loaded) {
    const std::size_t n = loaded.problem.dim();
    if (auto it = loaded.presets.find(config.x0); it != loaded.presets.end())
        return {it->second, config.x0};
    const std::vector<double> values = to_list("x0", config.x0);
    if (values.size() != n)
        throw UsageError("x0 has " + std::to_string(values.size()) + " entries but the problem has n = " +
                         std::to_string(n));
    return {Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(n)), "custom"};
}

nlohmann::ordered_json to_json(const Vector& v) {
    auto arr = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

nlohmann::ordered_json to_json(const PerPlayer<Vector>& p) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : p.storage()) arr.push_back(to_json(v));
    return arr;
}

nlohmann::ordered_json to_json(const PerPlayer<double>& p) {
    auto arr = nlohmann::ordered_json::array();
    for (double v : p.storage()) arr.push_back(v);
    return arr;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

}  // namespace

KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    KeyValues out;
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        out.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
    return out;
}

RunConfig make_run_config(const KeyValues& entries) {
    RunConfig cfg;
    for (const auto& [key, value] : entries) {
        if (key == "problem") {
            cfg.problem = value;
        } else if (key == "x0") {
            cfg.x0 = value;
        } else if (key == "mode") {
            if (value == "general") cfg.outer.mode = Mode::General;
            else if (value == "variational") cfg.outer.mode = Mode::Variational;
            else throw UsageError("mode must be 'general' or 'variational'");
        } else if (key == "umax") {
            cfg.outer.u_max = to_double(key, value);
        } else if (key == "rho0") {
            cfg.outer.rho0 = to_double(key, value);
        } else if (key == "tau") {
            cfg.outer.tau = to_list(key, value);
        } else if (key == "gamma") {
            cfg.outer.gamma = to_list(key, value);
        } else if (key == "eps") {
            cfg.outer.eps = to_double(key, value);
        } else if (key == "max-outer") {
            const long long v = to_integer(key, value);
            if (v < 0 || v > 1000000) throw UsageError("max-outer out of range");
            cfg.outer.max_outer = static_cast<int>(v);
        } else if (key == "report") {
            cfg.report = value;
        } else if (key == "trace") {
            cfg.trace = value;
        } else if (key == "seed") {
            const long long v = to_integer(key, value);
            if (v < 0) throw UsageError("seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(v);
        } else {
            throw UsageError("unknown configuration key '" + key + "'");
        }
    }
    return cfg;
}

int exit_code_for(Status status) {
    switch (status) {
        case Status::SolvedKKT: return kExitSolved;
        case Status::InfeasibleStationary: return kExitInfeasible;
        case Status::SubsolverFailure: return kExitSubsolverFailure;
        case Status::MaxOuterIterations: return kExitMaxOuter;
    }
    return kExitUsage;
}

namespace {

constexpr const char* kRowFormat = "%-18s %3s %5s %-8s %5s %8s %9s %9s %9s %9s";

}  // namespace

std::string table_header() {
    char buf[160];
    std::snprintf(buf, sizeof buf, kRowFormat, "Example", "N", "n", "x0", "k", "i_total", "R_f",
                  "R_o", "R_c", "rho_max");
    return buf;
}

std::string table_row(const std::string& name, std::size_t players, std::size_t dim,
                      const std::string& x0_label, const TerminationReport& report) {
    const bool ok = report.status == Status::SolvedKKT;
    auto num = [&](const std::string& s) { return ok ? s : std::string("F"); };
    char buf[256];
    std::snprintf(buf, sizeof buf, kRowFormat, name.c_str(), std::to_string(players).c_str(),
                  std::to_string(dim).c_str(), x0_label.c_str(), num(std::to_string(report.k)).c_str(),
                  num(std::to_string(report.i_total)).c_str(),
                  num(format_sci(report.residuals.feasibility)).c_str(),
                  num(format_sci(report.residuals.optimality)).c_str(),
                  num(format_sci(report.residuals.complementarity)).c_str(),
                  num(format_sci(report.rho_max)).c_str());
    return buf;
}

std::string trace_line(const IterationRecord& record) {
    nlohmann::ordered_json j;
    j["k"] = record.k;
    j["x"] = to_json(record.x);
    j["shared"] = record.multipliers.lambda.shared();
    j["lambda"] = to_json(record.multipliers.lambda);
    j["mu"] = to_json(record.multipliers.mu);
    j["u"] = to_json(record.u);
    j["rho"] = to_json(record.rho);
    j["inner_iters"] = record.inner_iters;
    j["i_total"] = record.i_total;
    j["inner_status"] = to_string(record.inner_status);
    j["R_f"] = record.residuals.feasibility;
    j["R_o"] = record.residuals.optimality;
    j["R_c"] = record.residuals.complementarity;
    j["vmeasure"] = to_json(record.vmeasure);
    return j.dump();
}

RunOutcome run(const RunConfig& config) {
    RunOutcome outcome;
    try {
        const LoadedProblem loaded = load(config);
        const auto [x0, label] = resolve_x0(config, loaded);
        TerminationReport report;
        try {
            report = config.outer.mode == Mode::Variational
                         ? solve_variational(loaded.problem, x0, config.outer)
                         : solve(loaded.problem, x0, config.outer);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }

        std::ostringstream text;
        text << table_header() << '\n'
             << table_row(loaded.problem.name(), loaded.problem.num_players(), loaded.problem.dim(),
                          label, report)
             << '\n';
        text << "status: " << to_string(report.status) << '\n';
        text << "mode: " << (config.outer.mode == Mode::Variational ? "variational" : "general") << '\n';
        text << "x:";
        for (Eigen::Index i = 0; i < report.x.size(); ++i) text << ' ' << format_full(report.x[i]);
        text << '\n';
        outcome.report_text = text.str();
        outcome.exit_code = exit_code_for(report.status);

        if (!config.report.empty()) write_file(config.report, outcome.report_text);
        if (!config.trace.empty()) {
            std::string lines;
            for (const auto& rec : report.trace) lines += trace_line(rec) + '\n';
            write_file(config.trace, lines);
        }
    } catch (const UsageError& e) {
        outcome = RunOutcome{};
        outcome.exit_code = kExitUsage;
        outcome.error = e.what();
    }
    return outcome;
}

int run_batch(const std::string& dir, std::string* summary) {
    if (!fs::is_directory(dir)) throw UsageError("batch directory '" + dir + "' does not exist");
    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cfg") configs.push_back(entry.path());
    std::sort(configs.begin(), configs.end());

    std::vector<std::future<RunOutcome>> jobs;
    for (const auto& path : configs) {
        jobs.push_back(std::async(std::launch::async, [path] {
            RunConfig cfg;
            try {
                cfg = make_run_config(read_config_file(path.string()));
            } catch (const UsageError& e) {
                RunOutcome bad;
                bad.error = e.what();
                return bad;
            }
            const fs::path stem = path.parent_path() / path.stem();
            if (cfg.report.empty()) cfg.report = stem.string() + ".report";
            if (cfg.trace.empty()) cfg.trace = stem.string() + ".trace.jsonl";
            return run(cfg);
        }));
    }
    int worst = 0;
    std::ostringstream os;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const RunOutcome out = jobs[i].get();
        worst = std::max(worst, out.exit_code);
        os << configs[i].filename().string() << ": exit " << out.exit_code;
        if (!out.error.empty()) os << " (" << out.error << ")";
        os << '\n';
    }
    if (summary != nullptr) *summary = os.str();
    return worst;
}

}  // namespace gnep
