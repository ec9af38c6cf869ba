// ach: command-line front end.
//
//   ach solve | sweep-j | rescale-check | flat-check | profile [--config PATH] [--out PATH]
//       [--format json|csv] [--tol REAL] [--trunc-extra INT] [--seed INT]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad config or model,
// 3 solver error, 4 window error.

#include "ach/corpus.hpp"
#include "ach/error.hpp"
#include "ach/report.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace ach;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitWindow = 4;

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::OutOfWindow:
    case ErrorCode::WindowTooLarge:
        return kExitWindow;
    case ErrorCode::NonPositiveLevi:
    case ErrorCode::JacobiViolation:
    case ErrorCode::ValidationFailed:
    case ErrorCode::IncompatibleJ:
    case ErrorCode::InvalidArgument:
        return kExitConfig;
    default:
        return kExitSolver;
    }
}

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Check {
    std::string name;
    double residual;
    double tolerance;
    bool pass() const { return residual <= tolerance; }
};

struct Outcome {
    Json report;
    std::string csv;
    bool pass = true;
};

Json checks_json(const std::vector<Check>& checks, bool& pass)
{
    Json out = Json::array();
    for (const auto& c : checks) {
        out.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
        pass = pass && c.pass();
    }
    return out;
}

std::string checks_csv(const std::vector<Check>& checks)
{
    std::string s = "name,residual,tolerance,pass\n";
    for (const auto& c : checks) {
        s += c.name + "," + num(c.residual) + "," + num(c.tolerance) + "," + (c.pass() ? "1" : "0") + "\n";
    }
    return s;
}

double max_abs(const LaurentJet& a)
{
    double m = 0.0;
    for (const Complex& z : a.coeffs()) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

double max_abs(const std::vector<Complex>& v)
{
    double m = 0.0;
    for (const Complex& z : v) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

Outcome run_solve(const RunConfig& cfg)
{
    const PhmModel m = build_model(cfg.model, cfg.seed);
    const SolverState st = solve(m, cfg.solver);
    const VolumeReport vol = expansion(st);
    const int n = m.n();

    std::vector<Check> checks;
    const auto table = residual_orders(st, cfg.solver.tol);
    checks.push_back({"residual_orders", orders_ok(table) ? 0.0 : 1.0, 0.0});
    double leftover = 0.0;
    for (const auto& r : st.stages) {
        if (!r.consistent) {
            leftover = std::max(leftover, r.residual_after);
        }
    }
    checks.push_back({"stage_residual", leftover, cfg.solver.tol});
    checks.push_back({"ein_reality", ein_reality_residual(st.curv, m), cfg.solver.tol});
    checks.push_back({"scalar_constant_term",
                      std::abs(st.curv.Scal.coefficient(0) + 4.0 * (n + 2) * (n + 1)), cfg.solver.tol});
    checks.push_back({"L_imaginary_part", std::abs(vol.L_imag), cfg.solver.tol});

    Outcome out;
    out.report = solve_report(st, vol);
    out.report["checks"] = checks_json(checks, out.pass);
    out.report["pass"] = out.pass;
    out.csv = checks_csv(checks);
    return out;
}

Outcome run_sweep(const RunConfig& cfg)
{
    const PhmModel m = build_model(cfg.model, cfg.seed);
    const SweepSpec& sw = cfg.sweep;
    const JFamily family = sw.family == "rotation" ? JFamily::rotation(m.h(), sw.rate) : JFamily::degenerating(m.h());

    struct Row {
        double t = 0.0;
        double L = 0.0;
        double ReB = 0.0;
        double absO = 0.0;
        bool orders = false;
        std::string error;
    };
    std::vector<Row> rows;
    for (int i = 0; i < sw.points; ++i) {
        Row r;
        r.t = sw.points == 1 ? sw.t0 : sw.t0 + (sw.t1 - sw.t0) * i / (sw.points - 1);
        try {
            const SolverState st = solve(deform_J(m, family, r.t), cfg.solver);
            const VolumeReport vol = expansion(st);
            r.L = vol.L;
            r.ReB = vol.obstructions.B.real();
            r.absO = max_abs(vol.obstructions.O);
            r.orders = orders_ok(residual_orders(st, cfg.solver.tol));
        } catch (const Error& e) {
            r.error = std::string(to_string(e.code()));
        }
        rows.push_back(r);
    }

    // Deviations are measured from the first grid point that solved.
    double max_dev = 0.0;
    double L0 = 0.0;
    bool have_ref = false;
    bool errors = false;
    for (const Row& r : rows) {
        if (!r.error.empty()) {
            errors = true;
            continue;
        }
        if (!have_ref) {
            L0 = r.L;
            have_ref = true;
        }
        max_dev = std::max(max_dev, std::abs(r.L - L0));
    }
    const double tol = 1e-8 * (1.0 + std::abs(L0));

    Outcome out;
    out.pass = have_ref && !errors && max_dev <= tol;
    Json jr = Json::array();
    out.csv = "t,L,ReB,absO,orders_ok,error\n";
    for (const Row& r : rows) {
        jr.push_back({{"t", r.t}, {"L", r.L}, {"ReB", r.ReB}, {"absO", r.absO}, {"orders_ok", r.orders},
                      {"error", r.error}});
        if (r.error.empty()) {
            out.csv += num(r.t) + "," + num(r.L) + "," + num(r.ReB) + "," + num(r.absO) + "," +
                       (r.orders ? "1" : "0") + ",\n";
        } else {
            out.csv += num(r.t) + ",,,,," + r.error + "\n";
        }
    }
    out.csv += "max_dev," + num(max_dev) + ",,,,\n";
    out.report = {{"model", to_json(m)},
                  {"family", sw.family},
                  {"rate", sw.rate},
                  {"rows", jr},
                  {"max_dev", max_dev},
                  {"tolerance", tol},
                  {"pass", out.pass}};
    return out;
}

Outcome run_rescale(const RunConfig& cfg)
{
    const PhmModel m = build_model(cfg.model, cfg.seed);
    const double L = expansion(solve(m, cfg.solver)).L;
    std::vector<Check> checks;
    Json items = Json::array();
    for (double u : cfg.upsilon) {
        const RescaleReport r = rescale_check(m, u, cfg.solver);
        const double Lhat = expansion(solve(rescale_contact_form(m, u), cfg.solver)).L;
        const std::string tag = "upsilon=" + num(u);
        checks.push_back({"B " + tag, r.B_mismatch, 1e-8 * (1.0 + std::abs(r.original.B))});
        checks.push_back({"O " + tag, r.O_mismatch, 1e-8 * (1.0 + max_abs(r.original.O))});
        checks.push_back({"L " + tag, std::abs(Lhat - L), 1e-8 * (1.0 + std::abs(L))});
        items.push_back({{"upsilon", u},
                         {"original", to_json(r.original)},
                         {"rescaled", to_json(r.rescaled)},
                         {"B_mismatch", r.B_mismatch},
                         {"O_mismatch", r.O_mismatch},
                         {"L", L},
                         {"L_rescaled", Lhat}});
    }
    Outcome out;
    out.report = {{"model", to_json(m)}, {"rescale", items}};
    out.report["checks"] = checks_json(checks, out.pass);
    out.report["pass"] = out.pass;
    out.csv = checks_csv(checks);
    return out;
}

Outcome run_flat_check(const RunConfig& cfg)
{
    constexpr double tol = 1e-11;
    std::vector<Check> checks;
    for (int n : cfg.flat_n) {
        if (n < 1 || n > 6) {
            throw Error(ErrorCode::InvalidArgument, "flat_check.n: expected 1..6");
        }
        const PhmModel m = flat_heisenberg(n, MatrixC::Identity(n, n));
        const SolverState st = solve(m, cfg.solver);
        const VolumeReport vol = expansion(st);
        const Fields& f = st.fields;

        double ds = max_abs(f.s - LaurentJet::constant(4.0, f.s.trunc()));
        double dh = 0.0;
        double de = 0.0;
        for (int A = 0; A < 2 * n; ++A) {
            for (int B = 0; B < 2 * n; ++B) {
                const LaurentJet& h = f.ht(A, B);
                dh = std::max(dh, max_abs(h - LaurentJet::constant(m.h_full()(A, B), h.trunc())));
            }
            de = std::max(de, max_abs(f.eta[static_cast<std::size_t>(A)]));
        }
        double ein = 0.0;
        for (int J = 0; J < st.curv.Ein.rows(); ++J) {
            for (int K = 0; K < st.curv.Ein.cols(); ++K) {
                ein = std::max(ein, max_abs(st.curv.Ein(J, K)));
            }
        }
        double v = 0.0;
        for (std::size_t j = 1; j < vol.v.size(); ++j) {
            v = std::max(v, std::abs(vol.v[j]));
        }
        const std::string tag = " n=" + std::to_string(n);
        checks.push_back({"s-4" + tag, ds, tol});
        checks.push_back({"h~-h" + tag, dh, tol});
        checks.push_back({"eta~" + tag, de, tol});
        checks.push_back({"Ein" + tag, ein, tol});
        checks.push_back({"B" + tag, std::abs(vol.obstructions.B), tol});
        checks.push_back({"O" + tag, max_abs(vol.obstructions.O), tol});
        checks.push_back({"v" + tag, v, tol});
    }
    Outcome out;
    out.report = Json::object();
    out.report["checks"] = checks_json(checks, out.pass);
    out.report["pass"] = out.pass;
    out.csv = checks_csv(checks);
    return out;
}

Outcome run_profile(const RunConfig& cfg)
{
    const PhmModel m = build_model(cfg.model, cfg.seed);
    const SolverState st = solve(m, cfg.solver);
    const VolumeProfile p = numeric_profile(st, cfg.eps, cfg.eps0);

    std::vector<Check> checks;
    std::vector<ProfileRow> rows = p.rows;
    for (const auto& r : rows) {
        checks.push_back({"eps=" + num(r.eps), std::abs(r.difference), 1e-6 * (1.0 + std::abs(r.series))});
    }
    // Moving towards the boundary the difference must shrink, unless both values are
    // already below the quadrature accuracy.
    std::sort(rows.begin(), rows.end(), [](const ProfileRow& a, const ProfileRow& b) { return a.eps < b.eps; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double floor = 1e-30 * (1.0 + std::abs(rows[i].series));
        const double d0 = std::abs(rows[i - 1].difference);
        const double d1 = std::abs(rows[i].difference);
        const bool shrinks = d1 < d0 || (d0 <= floor && d1 <= floor);
        checks.push_back({"shrinks eps=" + num(rows[i].eps), shrinks ? 0.0 : d1, 0.0});
    }
    Outcome out;
    out.report = {{"model", to_json(m)}, {"profile", to_json(p)}};
    out.report["checks"] = checks_json(checks, out.pass);
    out.report["pass"] = out.pass;
    out.csv = "eps,quadrature,series,difference\n";
    for (const auto& r : p.rows) {
        out.csv += num(r.eps) + "," + num(r.quadrature) + "," + num(r.series) + "," + num(r.difference) + "\n";
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Approximate Einstein ACH metrics, obstructions and the log term of the renormalized volume"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format;
    double tol = -1.0;
    int trunc_extra = -1;
    long long seed = -1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--tol", tol, "solver and check tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--trunc-extra", trunc_extra, "orders kept past n")->check(CLI::Range(3, 40));
        sub->add_option("--seed", seed, "seed for random models")->check(CLI::NonNegativeNumber);
    };
    struct Command {
        const char* name;
        const char* help;
        Outcome (*run)(const RunConfig&);
        const char* default_format;
    };
    const Command commands[] = {
        {"solve", "solve the model and report fields, orders, B, O, v and L", run_solve, "json"},
        {"sweep-j", "track L, B and O along a family of almost CR structures", run_sweep, "csv"},
        {"rescale-check", "covariance of B, O and L under a constant rescaling", run_rescale, "json"},
        {"flat-check", "exactness on the flat Heisenberg models", run_flat_check, "json"},
        {"profile", "numeric volume against the renormalized series", run_profile, "json"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        subs.push_back(app.add_subcommand(c.name, c.help));
        add_common(subs.back());
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    std::size_t which = 0;
    while (!subs[which]->parsed()) {
        ++which;
    }
    const Command& cmd = commands[which];

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            Json j;
            try {
                j = Json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                std::cerr << "config: " << config_path << ": " << e.what() << "\n";
                return kExitConfig;
            }
            cfg = config_from_json(j);
        }
        if (tol > 0) {
            cfg.solver.tol = tol;
        }
        if (trunc_extra > 0) {
            cfg.solver.trunc_extra = trunc_extra;
        }
        if (seed >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed);
        }
        if (format.empty()) {
            format = cmd.default_format;
        }

        const Outcome out = cmd.run(cfg);
        const std::string text = format == "csv" ? out.csv : out.report.dump(2) + "\n";
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) {
                std::cerr << "cannot write " << out_path << "\n";
                return kExitConfig;
            }
            f << text;
        }
        if (!out.pass) {
            std::cerr << cmd.name << ": checks failed\n";
        }
        return out.pass ? 0 : kExitFail;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.code());
    }
}
