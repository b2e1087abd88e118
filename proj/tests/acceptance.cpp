// Acceptance suite: one PASS/FAIL line per criterion with its measured
// runtime against the pinned limit. Exit status is nonzero if any fails.

#include "gnep/alcore.hpp"
#include "gnep/diagnostics.hpp"
#include "gnep/nnls.hpp"
#include "gnep/outer.hpp"
#include "gnep/problems.hpp"
#include "gnep/run.hpp"
#include "gnep/subsolver.hpp"
#include "support.hpp"
#include "trace_checks.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <unistd.h>

using namespace gnep;
using namespace gnep::testing;
namespace fs = std::filesystem;

namespace {

// Collects failed checks of one criterion.
struct Checker {
    int count = 0;
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        ++count;
        if (!ok) failures.push_back(what);
    }
};

struct Criterion {
    int id;
    std::string title;
    double limit_s;
    std::function<void(Checker&)> body;
};

std::vector<TerminationReport>& recorded_traces() {
    static std::vector<TerminationReport> traces;
    return traces;
}

struct TraceContext {
    std::vector<double> gamma;
    double u_max;
};
std::vector<TraceContext>& recorded_contexts() {
    static std::vector<TraceContext> ctx;
    return ctx;
}

void record(const TerminationReport& r, const OuterConfig& cfg, const GnepProblem& p) {
    recorded_traces().push_back(r);
    recorded_contexts().push_back({resolve_gamma(cfg, p), cfg.u_max});
}

PenaltyState state_of(const GnepProblem& p, double u, double rho, bool shared = false) {
    PenaltyState s(p, 1e6, rho, shared);
    for (std::size_t v = 0; v < s.u_all().storage().size(); ++v) s.set_u(v, Vector::Constant(p.g_count(v), u));
    return s;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

void formula_suite(Checker& c) {
    const GnepProblem c5m3 = one_dim(constant(5), {constant(-3)});
    c.expect(al_value(c5m3, 0, vec({0}), state_of(c5m3, 0, 2)) == 5, "al_value clamp case");
    const GnepProblem c5p1 = one_dim(constant(5), {constant(1)});
    c.expect(al_value(c5p1, 0, vec({0}), state_of(c5p1, 2, 2)) == 9, "al_value direct formula");
    const GnepProblem c00 = one_dim(constant(0), {constant(0)});
    c.expect(al_value(c00, 0, vec({0}), state_of(c00, 0, 3)) == 0, "al_value zero case");

    c.expect(shifted_multiplier(vec({-1}), vec({2}), 4) == vec({0}), "shifted clamp");
    c.expect(shifted_multiplier(vec({3}), vec({0}), 1) == vec({3}), "shifted identity");
    c.expect(near(shifted_multiplier(vec({-0.05}), vec({1}), 10)[0], 0.5, 1e-15), "shifted formula");

    const GnepProblem duo = make_duopoly_shared();
    c.expect(al_gradient_block(duo, 0, vec({0.1, 0.2}), state_of(duo, 0, 1)) == duo.grad_theta(0, vec({0.1, 0.2})),
             "gradient clamp case");
    const GnepProblem lin = one_dim(linear(1), {quadratic(1, 0, 1)});
    c.expect(al_gradient_block(lin, 0, vec({0}), state_of(lin, 0, 1)) == vec({1}), "gradient direct formula");

    const GnepProblem sq = one_dim(quadratic(1, 0, 0));
    c.expect(assemble_F(sq, vec({0}), state_of(sq, 0, 1)) == vec({0}), "F zero at 0");
    c.expect(assemble_F(sq, vec({1.5}), state_of(sq, 0, 1)) == vec({3}), "F = 2x");

    const GnepProblem q3 = make_quad3();
    const PenaltyState q3s = state_of(q3, 0, 1);
    const Matrix Vq = generalized_jacobian(q3, Vector::Constant(6, -1), q3s);
    c.expect(Vq.topRows(2) == q3.hess_theta_rows(0, Vector::Constant(6, -1)), "V clamp case");
    const GnepProblem lg = one_dim(constant(0), {linear(1)});
    c.expect(generalized_jacobian(lg, vec({0}), state_of(lg, 1, 2))(0, 0) == 2, "V direct formula");

    c.expect(shared_penalty_term(duo, vec({0.5, 0.5}), state_of(duo, 0, 1, true)) == 0, "shared zero");
    c.expect(shared_penalty_term(duo, vec({1, 1}), state_of(duo, 0, 2, true)) == 1, "shared direct formula");

    c.expect(initial_multipliers(lg, vec({0})).lambda[0] == vec({0}), "lambda0 zero gradient");
    const GnepProblem m2 = one_dim(linear(-2), {linear(1)});
    c.expect(near(initial_multipliers(m2, vec({0})).lambda[0][0], 2, 1e-14), "lambda0 exact fit");
    const GnepProblem inact = one_dim(linear(-2), {linear(1, -1)});
    c.expect(initial_multipliers(inact, vec({0})).lambda[0] == vec({0}), "lambda0 pre-filter");

    c.expect(nnls(Matrix::Identity(2, 2), vec({1, -1})) == vec({1, 0}), "nnls clamped identity");
    c.expect(nnls(Matrix::Identity(2, 2), vec({0, 0})) == vec({0, 0}), "nnls zero rhs");

    PenaltyState zero_umax(duo, 0.0, 5.0, false);
    const Vector xv = vec({0.9, 0.4});
    c.expect(update_multipliers(duo, xv, zero_umax)[0] == 5.0 * duo.g(0, xv).cwiseMax(0.0),
             "u_max = 0 quadratic penalty");
    PenaltyState gu = state_of(duo, 0.25, 3);
    c.expect(update_multipliers(duo, vec({0.5, 0.5}), gu)[0] == vec({0.25}), "g = 0 returns u");

    auto single = [](double v) { return PerPlayer<double>::separate({v}); };
    c.expect(update_penalty(single(0.05), single(1), {0.1}, {10}, single(1))[0] == 1, "rho kept");
    c.expect(update_penalty(single(0.5), single(1), {0.1}, {10}, single(1))[0] == 10, "rho increased");
    c.expect(update_penalty(single(0), single(0), {0.1}, {10}, single(1))[0] == 1, "rho degenerate equality");

    c.expect(update_safeguard(vec({1e9}), 1e6) == vec({1e6}), "safeguard clamp");
    c.expect(update_safeguard(vec({0.3}), 1e6) == vec({0.3}), "safeguard passthrough");
    c.expect(update_safeguard(vec({0.3}), 0) == vec({0}), "safeguard zero");

    MultiplierSet m0 = MultiplierSet::zeros(inact, false);
    const Residuals r0 = stopping_residuals(one_dim(constant(0), {linear(1, -1)}), vec({0}), m0);
    c.expect(r0.all_below(0.0), "residuals at feasible zero-gradient point");
    const GnepProblem direct = one_dim(linear(0.1), {constant(0.3)});
    MultiplierSet md = MultiplierSet::zeros(direct, false);
    md.lambda[0] = vec({2});
    const Residuals rd = stopping_residuals(direct, vec({0}), md);
    c.expect(near(rd.feasibility, 0.3, 1e-15) && near(rd.optimality, 0.1, 1e-15) &&
                 near(rd.complementarity, 0.6, 1e-15),
             "residual direct formulas");

    const TerminationReport un = solve(make_unconstrained_single(), vec({0}), OuterConfig{});
    c.expect(un.status == Status::SolvedKKT && un.k == 1, "unconstrained in one outer iteration");
    OuterConfig vcfg;
    vcfg.mode = Mode::Variational;
    bool threw = false;
    try {
        solve_variational(make_nonshared2(), vec({0, 0}), vcfg);
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    c.expect(threw, "variational requires shared constraints");

    c.expect(lm_step(Matrix::Identity(1, 1), vec({1}), 1) == vec({-0.5}), "lm_step direct");
    c.expect(lm_step(Matrix::Identity(1, 1), vec({0}), 1) == vec({0}), "lm_step zero");
    c.expect(spd_solve(2 * Matrix::Identity(2, 2), vec({4, 6})) == vec({2, 3}), "spd 2I");
    c.expect(spd_solve(Matrix::Identity(2, 2), vec({4, 6})) == vec({4, 6}), "spd identity");
    const LmSystem lin3{[](const Vector& x) { return Vector::Constant(1, 2 * (x[0] - 3)); },
                        [](const Vector&) { return Matrix::Constant(1, 1, 2.0); }};
    c.expect(lm_solve(lin3, vec({3}), LmConfig{}).iterations == 0, "LM immediate stop");

    const GnepProblem kk = one_dim(constant(0), {constant(-2)});
    const auto k1 = kkt_residual(kk, vec({0}), MultiplierSet::zeros(kk, false));
    c.expect(k1[0].stationarity == 0 && k1[0].complementarity == 0, "kkt inactive");
    MultiplierSet neg = MultiplierSet::zeros(c00, false);
    neg.lambda[0] = vec({-1});
    c.expect(kkt_residual(c00, vec({0}), neg)[0].complementarity == 1, "kkt sign violation");

    const GnepProblem inf = make_infeasible_single();
    c.expect(feasibility_gnep_residual(duo, vec({0.2, 0.3}))[0] == 0, "feasibility residual feasible");
    c.expect(feasibility_gnep_residual(inf, vec({0}))[0] == 0, "feasibility residual at 0");
    c.expect(feasibility_gnep_residual(inf, vec({1}))[0] == 8, "feasibility residual at 1");

    c.expect(!positive_linear_independence((Matrix(2, 2) << 1, -1, 0, 0).finished()).independent,
             "PLI cancellation");
    c.expect(near(positive_linear_independence((Matrix(2, 1) << 1, 0).finished()).sigma, 1, 1e-10), "PLI single");
    c.expect(near(positive_linear_independence(Matrix::Identity(2, 2)).sigma, 1 / std::sqrt(2.0), 1e-8),
             "PLI symmetric");
    c.expect(emfcq_check(duo, 0, vec({0, 0})).status == EmfcqStatus::Holds, "EMFCQ vacuous");

    const MultiplierSet zinf = MultiplierSet::zeros(inf, false);
    c.expect(classify_point(inf, vec({0}), zinf, 1e-8, 1e-6) == PointClass::InfeasibleStationary,
             "classify infeasible stationary");
    c.expect(classify_point(inf, vec({1}), zinf, 1e-8, 1e-6) == PointClass::Neither, "classify neither");

    c.expect(block_of(duo, vec({7, 8}), 1) == vec({8}), "block slicing");
    threw = false;
    try {
        block_of(duo, vec({7, 8}), 2);
    } catch (const std::out_of_range&) {
        threw = true;
    }
    c.expect(threw, "block out of range");

    c.expect(validate_problem(sq, {vec({1})}, 1e-6).passed(), "validate x^2");
    c.expect(best_response_check(duo, vec({0.8, 0.8}), OracleConfig::box(2, 0, 1)).status ==
                 BestResponseStatus::NotApplicable,
             "best response on infeasible point");
}

std::vector<Vector> non_kink_points(const GnepProblem& p, const PenaltyState& s, std::mt19937_64& rng, int n) {
    std::vector<Vector> out;
    while (static_cast<int>(out.size()) < n) {
        const Vector x = uniform_point(rng, p.dim(), -1.5, 1.5);
        bool ok = true;
        for (std::size_t v = 0; v < p.num_players(); ++v) {
            const Vector sh = s.u(v) + s.rho(v) * p.g(v, x);
            for (Eigen::Index i = 0; i < sh.size(); ++i) ok = ok && std::abs(sh[i]) > 1e-3;
        }
        if (ok) out.push_back(x);
    }
    return out;
}

PenaltyState random_state(const GnepProblem& p, std::mt19937_64& rng) {
    PenaltyState s(p, 1e6, 2.5, false);
    for (std::size_t v = 0; v < p.num_players(); ++v) s.set_u(v, uniform_point(rng, p.g_count(v), 0.0, 2.0));
    return s;
}

void gradient_audit(Checker& c) {
    std::mt19937_64 rng(2024);
    for (const auto& e : catalog()) {
        const GnepProblem& p = e.problem;
        const PenaltyState s = random_state(p, rng);
        for (const Vector& x : non_kink_points(p, s, rng, 10)) {
            for (std::size_t v = 0; v < p.num_players(); ++v) {
                const Vector grad = al_gradient_block(p, v, x, s);
                const auto f = [&](const Vector& y) { return al_value(p, v, y, s); };
                for (std::size_t i = 0; i < p.dim(v); ++i) {
                    const double fd = central_diff(f, x, static_cast<Eigen::Index>(p.offset(v) + i));
                    c.expect(rel_err(grad[static_cast<Eigen::Index>(i)], fd) <= 1e-5, p.name());
                }
            }
        }
    }
}

void jacobian_audit(Checker& c) {
    std::mt19937_64 rng(2025);
    for (const auto& e : catalog()) {
        const GnepProblem& p = e.problem;
        const PenaltyState s = random_state(p, rng);
        for (const Vector& x : non_kink_points(p, s, rng, 10)) {
            const Matrix V = generalized_jacobian(p, x, s);
            const Vector Fx = assemble_F(p, x, s);
            for (Eigen::Index j = 0; j < x.size(); ++j) {
                Vector xt = x;
                xt[j] += 1e-6;
                const Vector fd = (assemble_F(p, xt, s) - Fx) / 1e-6;
                c.expect((fd - V.col(j)).norm() <= 1e-4, p.name());
            }
        }
    }
}

void variational_convergence(Checker& c) {
    const GnepProblem p = make_duopoly_shared();
    OuterConfig cfg;
    cfg.mode = Mode::Variational;
    for (double s : {0.0, 1.0, 10.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const TerminationReport r = solve_variational(p, vec({s, s}), cfg);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        record(r, cfg, p);
        const std::string tag = "start " + std::to_string(s);
        c.expect(r.status == Status::SolvedKKT, tag + ": status");
        c.expect((r.x - vec({0.75, 0.25})).lpNorm<Eigen::Infinity>() <= 1e-6, tag + ": x");
        c.expect(near(r.multipliers.lambda[0][0], 0.5, 1e-6), tag + ": lambda");
        c.expect(r.residuals.all_below(1e-8), tag + ": residuals");
        c.expect(r.k <= 30, tag + ": k");
        c.expect(r.rho_max <= 1e4, tag + ": rho_max");
        c.expect(dt < 1.0, tag + ": runtime");
    }
}

void general_equilibrium(Checker& c) {
    const GnepProblem p = make_duopoly_shared();
    const OuterConfig cfg;
    const TerminationReport r = solve(p, vec({0, 0}), cfg);
    record(r, cfg, p);
    c.expect(r.status == Status::SolvedKKT, "status");
    c.expect(std::abs(r.x[0] + r.x[1] - 1) <= 1e-6, "on x1 + x2 = 1");
    c.expect(r.x[0] >= 0.5 - 1e-6 && r.x[0] <= 1 + 1e-6, "x1 in [1/2, 1]");
    OracleConfig oc = OracleConfig::box(2, 0, 1);
    oc.feas_tol = 1e-6;
    c.expect(best_response_check(p, r.x, oc).status == BestResponseStatus::Equilibrium, "grid oracle");
}

void infeasible_detection(Checker& c) {
    const GnepProblem p = make_infeasible_single();
    const OuterConfig cfg;
    const TerminationReport r = solve(p, vec({0}), cfg);
    record(r, cfg, p);
    c.expect(r.status == Status::InfeasibleStationary, "status");
    c.expect(std::abs(r.x[0]) <= 1e-4, "|x|");
    c.expect(feasibility_gnep_residual(p, r.x)[0] <= 1e-6, "feasibility residual");
}

void quadratic_penalty(Checker& c) {
    const GnepProblem p = make_duopoly_shared();
    OuterConfig cfg;
    cfg.u_max = 0.0;
    cfg.eps = 1e-6;
    const TerminationReport r = solve(p, vec({0, 0}), cfg);
    record(r, cfg, p);
    c.expect(r.status == Status::SolvedKKT, "status");
    c.expect(r.residuals.all_below(1e-6), "residuals");
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const IterationRecord& rec = r.trace[k];
        for (const Vector& u : rec.u.storage()) c.expect(u == Vector::Zero(u.size()), "u^k == 0");
        if (k == 0) continue;
        for (std::size_t v = 0; v < 2; ++v)
            c.expect(rec.multipliers.lambda[v] == r.trace[k - 1].rho[v] * p.g(v, rec.x).cwiseMax(0.0),
                     "lambda == rho g_+ at k=" + std::to_string(k));
    }
}

void cq_fixtures(Checker& c) {
    const GnepProblem a = make_example24a();
    c.expect(emfcq_check(a, 0, vec({0, 0})).status == EmfcqStatus::Holds, "(a) player 1 holds");
    c.expect(emfcq_check(a, 1, vec({0, 0})).status == EmfcqStatus::Fails, "(a) player 2 fails");
    const GnepProblem b = make_example24b();
    const Vector x = vec({1, 1});
    c.expect(emfcq_check(b, 0, x).status == EmfcqStatus::Holds, "(b) player 1 holds");
    c.expect(emfcq_check(b, 1, x).status == EmfcqStatus::Holds, "(b) player 2 holds");
    Matrix full(2, 2);
    full.col(0) = b.g_gradients(0, x).col(0);
    full.col(1) = b.g_gradients(1, x).col(0);
    c.expect(full == (Matrix(2, 2) << 2, -2, -2, 2).finished(), "(b) concatenated gradients");
    c.expect(!positive_linear_independence(full).independent, "(b) concatenated gradients dependent");
}

void invariant_sweep(Checker& c) {
    const LmConfig lm;
    c.expect(!recorded_traces().empty(), "traces recorded");
    for (std::size_t i = 0; i < recorded_traces().size(); ++i) {
        const std::string why =
            trace_violation(recorded_traces()[i], recorded_contexts()[i].gamma, recorded_contexts()[i].u_max, lm);
        c.expect(why.empty(), "trace " + std::to_string(i) + ": " + why);
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void determinism(Checker& c) {
    const fs::path dir = fs::temp_directory_path() / ("gnep_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    for (const char* start : {"zero", "ones", "tens"}) {
        std::string reports[2], traces[2];
        for (int i = 0; i < 2; ++i) {
            RunConfig cfg = make_run_config({{"problem", "duopoly_shared"}, {"mode", "variational"}, {"x0", start}});
            cfg.report = (dir / ("r" + std::to_string(i))).string();
            cfg.trace = (dir / ("t" + std::to_string(i))).string();
            const RunOutcome o = run(cfg);
            c.expect(o.exit_code == 0, std::string(start) + ": exit code");
            reports[i] = slurp(cfg.report);
            traces[i] = slurp(cfg.trace);
        }
        c.expect(!reports[0].empty() && reports[0] == reports[1], std::string(start) + ": report bytes");
        c.expect(!traces[0].empty() && traces[0] == traces[1], std::string(start) + ": trace bytes");
    }
    fs::remove_all(dir);
}

void nnls_oracle(Checker& c) {
    std::mt19937_64 rng(11011);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> dims(1, 8);
    for (int t = 0; t < 100; ++t) {
        const int m = dims(rng), n = dims(rng);
        Matrix A(m, n);
        Vector b(m);
        for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = normal(rng);
        const Vector l = nnls(A, b);
        const Vector w = A.transpose() * (A * l - b);
        double viol = std::max(0.0, -l.minCoeff());
        for (Eigen::Index i = 0; i < n; ++i)
            viol = std::max({viol, -w[i], std::abs(l[i] * w[i])});
        c.expect(viol <= 1e-10, "instance " + std::to_string(t) + ": KKT");
        const double best = (A * l - b).squaredNorm();
        std::uniform_real_distribution<double> unif(0.0, std::max(1.0, 2 * l.maxCoeff()));
        bool beaten = false;
        for (int s = 0; s < 1000; ++s) {
            Vector trial(n);
            for (Eigen::Index i = 0; i < n; ++i) trial[i] = unif(rng);
            beaten = beaten || (A * trial - b).squaredNorm() < best - 1e-12;
        }
        c.expect(!beaten, "instance " + std::to_string(t) + ": sampling");
    }
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "formula unit suite", 1.0, formula_suite},
        {2, "gradient audit", 5.0, gradient_audit},
        {3, "jacobian audit", 5.0, jacobian_audit},
        {4, "variational convergence (duopoly_shared)", 3.0, variational_convergence},
        {5, "general-mode equilibrium", 2.0, general_equilibrium},
        {6, "infeasible detection", 2.0, infeasible_detection},
        {7, "quadratic-penalty reduction (u_max = 0)", 5.0, quadratic_penalty},
        {8, "CQ fixtures", 1.0, cq_fixtures},
        {9, "invariant sweep over traces of 4-7", 1.0, invariant_sweep},
        {10, "determinism (byte-identical replay)", 2.0, determinism},
        {11, "NNLS oracle", 5.0, nnls_oracle},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Checker chk;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(chk);
        } catch (const std::exception& e) {
            chk.failures.push_back(std::string("exception: ") + e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool min_count = cr.id != 1 || chk.count >= 30;
        const bool ok = chk.failures.empty() && dt < cr.limit_s && min_count;
        if (!ok) ++failed;
        std::printf("%s [%2d] %-44s checks=%-5d time=%.3fs (limit %.0fs)\n", ok ? "PASS" : "FAIL", cr.id,
                    cr.title.c_str(), chk.count, dt, cr.limit_s);
        for (std::size_t i = 0; i < chk.failures.size() && i < 5; ++i)
            std::printf("       - %s\n", chk.failures[i].c_str());
        if (!min_count) std::printf("       - only %d assertions (need >= 30)\n", chk.count);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
