#include "ach/report.hpp"

#include "ach/corpus.hpp"
#include "ach/error.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace ach {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    throw Error(ErrorCode::InvalidArgument, where + ": " + what);
}

Complex complex_from(const Json& j, const std::string& where)
{
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        bad(where, "expected [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T get(const Json& obj, const char* key, const std::string& where, T fallback)
{
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        bad(where + "." + key, "wrong type");
    }
}

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) {
        bad(where, "expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
        if (!ok.count(k)) {
            bad(where, "unknown key '" + k + "'");
        }
    }
}

int index_of(const std::string& label, int n, const std::string& where)
{
    if (label == "T") {
        return 0;
    }
    try {
        if (label.rfind("Wb", 0) == 0) {
            const int a = std::stoi(label.substr(2));
            if (a >= 1 && a <= n) {
                return n + a;
            }
        } else if (label.rfind("W", 0) == 0) {
            const int a = std::stoi(label.substr(1));
            if (a >= 1 && a <= n) {
                return a;
            }
        }
    } catch (const std::exception&) {
    }
    bad(where, "unknown basis label '" + label + "'");
}

} // namespace

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const LaurentJet& a)
{
    Json c = Json::array();
    for (const Complex& z : a.coeffs()) {
        c.push_back(to_json(z));
    }
    return {{"min_deg", a.min_deg()}, {"trunc", a.trunc()}, {"coeffs", c}};
}

Json to_json(const PhmModel& m)
{
    const int n = m.n();
    Json h = Json::array();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            h.push_back(to_json(m.h()(i, j)));
        }
    }
    Json br = Json::array();
    for (int J = 0; J < m.dim(); ++J) {
        for (int K = J + 1; K < m.dim(); ++K) {
            for (int L = 0; L < m.dim(); ++L) {
                const Complex c = m.c()(J, K, L);
                if (c != Complex{}) {
                    br.push_back({{"J", m.label(J)}, {"K", m.label(K)}, {"L", m.label(L)}, {"re", c.real()},
                                  {"im", c.imag()}});
                }
            }
        }
    }
    return {{"n", n}, {"vol_M", m.vol_M()}, {"h", h}, {"brackets", br}};
}

Json to_json(const std::vector<OrderEntry>& table)
{
    Json out = Json::array();
    for (const auto& e : table) {
        out.push_back({{"component", e.component},
                       {"required", e.required},
                       {"first_order", e.first_order ? Json(*e.first_order) : Json(nullptr)},
                       {"window", e.window},
                       {"ok", e.ok}});
    }
    return out;
}

Json to_json(const Obstructions& ob)
{
    Json O = Json::array();
    for (const Complex& z : ob.O) {
        O.push_back(to_json(z));
    }
    return {{"B", to_json(ob.B)}, {"O", O}};
}

Json to_json(const VolumeProfile& p)
{
    Json rows = Json::array();
    for (const auto& r : p.rows) {
        rows.push_back({{"eps", r.eps}, {"quadrature", r.quadrature}, {"series", r.series}, {"difference", r.difference}});
    }
    return {{"eps0", p.eps0}, {"V", p.V}, {"rows", rows}};
}

PhmModel model_from_json(const Json& j)
{
    check_keys(j, "model", {"n", "vol_M", "h", "brackets"});
    if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<int>() < 1) {
        bad("model.n", "expected a positive integer");
    }
    const int n = j["n"].get<int>();
    const double vol = get<double>(j, "vol_M", "model", 1.0);
    if (!j.contains("h") || !j["h"].is_array() || j["h"].size() != static_cast<std::size_t>(n * n)) {
        bad("model.h", "expected n*n entries [re, im]");
    }
    MatrixC h(n, n);
    for (int i = 0; i < n * n; ++i) {
        h(i / n, i % n) = complex_from(j["h"][static_cast<std::size_t>(i)], "model.h[" + std::to_string(i) + "]");
    }
    StructureConstants c(2 * n + 1);
    if (!j.contains("brackets") || !j["brackets"].is_array()) {
        bad("model.brackets", "expected an array");
    }
    for (std::size_t i = 0; i < j["brackets"].size(); ++i) {
        const Json& b = j["brackets"][i];
        const std::string w = "model.brackets[" + std::to_string(i) + "]";
        check_keys(b, w, {"J", "K", "L", "re", "im"});
        for (const char* key : {"J", "K", "L"}) {
            if (!b.contains(key) || !b[key].is_string()) {
                bad(w + "." + key, "expected a basis label");
            }
        }
        const int J = index_of(b["J"].get<std::string>(), n, w + ".J");
        const int K = index_of(b["K"].get<std::string>(), n, w + ".K");
        const int L = index_of(b["L"].get<std::string>(), n, w + ".L");
        if (J == K) {
            bad(w, "bracket of a basis vector with itself");
        }
        c.set_bracket(J, K, L, {get<double>(b, "re", w, 0.0), get<double>(b, "im", w, 0.0)});
    }
    return custom(n, c, h, vol);
}

RunConfig config_from_json(const Json& j)
{
    check_keys(j, "config", {"model", "solver", "sweep", "rescale", "profile", "flat_check", "seed"});
    RunConfig cfg;
    cfg.seed = get<std::uint64_t>(j, "seed", "config", 0);
    if (j.contains("model")) {
        const Json& m = j["model"];
        check_keys(m, "model", {"builtin", "n", "a", "h1", "vol_M", "random", "name", "custom"});
        ModelSpec& s = cfg.model;
        s.builtin = get<std::string>(m, "builtin", "model", s.builtin);
        s.n = get<int>(m, "n", "model", s.n);
        if (m.contains("a")) {
            s.a = complex_from(m["a"], "model.a");
        }
        s.h1 = get<double>(m, "h1", "model", s.h1);
        s.vol_M = get<double>(m, "vol_M", "model", s.vol_M);
        s.random = get<bool>(m, "random", "model", s.random);
        s.name = get<std::string>(m, "name", "model", s.name);
        if (m.contains("custom")) {
            s.custom = m["custom"];
        }
        const std::set<std::string> kinds{"flat", "torsion", "product", "corpus", "custom", "file"};
        if (!kinds.count(s.builtin)) {
            bad("model.builtin", "unknown model kind '" + s.builtin + "'");
        }
        if (s.n < 1 || s.n > 6) {
            bad("model.n", "expected 1..6");
        }
    }
    if (j.contains("solver")) {
        const Json& s = j["solver"];
        check_keys(s, "solver", {"trunc_extra", "extend_tracefree", "tol"});
        cfg.solver.trunc_extra = get<int>(s, "trunc_extra", "solver", cfg.solver.trunc_extra);
        cfg.solver.extend_tracefree = get<bool>(s, "extend_tracefree", "solver", cfg.solver.extend_tracefree);
        cfg.solver.tol = get<double>(s, "tol", "solver", cfg.solver.tol);
    }
    if (j.contains("sweep")) {
        const Json& s = j["sweep"];
        check_keys(s, "sweep", {"family", "rate", "t0", "t1", "points"});
        SweepSpec& w = cfg.sweep;
        w.family = get<std::string>(s, "family", "sweep", w.family);
        w.rate = get<double>(s, "rate", "sweep", w.rate);
        w.t0 = get<double>(s, "t0", "sweep", w.t0);
        w.t1 = get<double>(s, "t1", "sweep", w.t1);
        w.points = get<int>(s, "points", "sweep", w.points);
        if (w.family != "rotation" && w.family != "degenerating") {
            bad("sweep.family", "expected rotation or degenerating");
        }
        if (w.points < 1 || !std::isfinite(w.t0) || !std::isfinite(w.t1)) {
            bad("sweep", "grid must be finite and nonempty");
        }
    }
    if (j.contains("rescale")) {
        check_keys(j["rescale"], "rescale", {"upsilon"});
        cfg.upsilon = get<std::vector<double>>(j["rescale"], "upsilon", "rescale", cfg.upsilon);
        if (cfg.upsilon.empty()) {
            bad("rescale.upsilon", "grid must be nonempty");
        }
    }
    if (j.contains("profile")) {
        check_keys(j["profile"], "profile", {"eps", "eps0"});
        cfg.eps = get<std::vector<double>>(j["profile"], "eps", "profile", cfg.eps);
        cfg.eps0 = get<double>(j["profile"], "eps0", "profile", cfg.eps0);
        if (cfg.eps.empty()) {
            bad("profile.eps", "grid must be nonempty");
        }
    }
    if (j.contains("flat_check")) {
        check_keys(j["flat_check"], "flat_check", {"n"});
        cfg.flat_n = get<std::vector<int>>(j["flat_check"], "n", "flat_check", cfg.flat_n);
        if (cfg.flat_n.empty()) {
            bad("flat_check.n", "list must be nonempty");
        }
    }
    return cfg;
}

PhmModel build_model(const ModelSpec& spec, std::uint64_t seed)
{
    PhmModel m = [&]() -> PhmModel {
        if (spec.builtin == "flat") {
            return flat_heisenberg(spec.n, MatrixC::Identity(spec.n, spec.n));
        }
        if (spec.builtin == "torsion" || spec.builtin == "product") {
            if (spec.random) {
                std::mt19937_64 rng(seed);
                return random_torsion_model(spec.n, rng);
            }
            if (spec.builtin == "torsion" && spec.n == 1) {
                return torsion_deformed(1, MatrixC::Constant(1, 1, spec.h1), MatrixC::Constant(1, 1, spec.a));
            }
            return torsion_product(spec.n, spec.a, spec.h1);
        }
        if (spec.builtin == "corpus") {
            for (auto& e : corpus()) {
                if (e.name == spec.name) {
                    return e.model;
                }
            }
            bad("model.name", "no corpus entry '" + spec.name + "'");
        }
        if (spec.builtin == "custom") {
            return model_from_json(spec.custom);
        }
        std::ifstream in(spec.name);
        if (!in) {
            bad("model.name", "cannot open '" + spec.name + "'");
        }
        Json j;
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            bad(spec.name, e.what());
        }
        return model_from_json(j);
    }();
    if (spec.vol_M != 1.0) {
        m = PhmModel(m.n(), m.c(), m.h(), spec.vol_M);
    }
    return m;
}

Json solve_report(const SolverState& state, const VolumeReport& vol)
{
    const int n2 = 2 * state.model.n();
    Json ht = Json::array();
    for (int A = 0; A < n2; ++A) {
        for (int B = 0; B < n2; ++B) {
            ht.push_back(to_json(state.fields.ht(A, B)));
        }
    }
    Json eta = Json::array();
    for (const auto& e : state.fields.eta) {
        eta.push_back(to_json(e));
    }
    Json stages = Json::array();
    for (const auto& r : state.stages) {
        stages.push_back({{"k", r.k},
                          {"unknowns", r.unknowns},
                          {"rank", r.rank},
                          {"residual_before", r.residual_before},
                          {"residual_after", r.residual_after},
                          {"pivot_ratio", r.pivot_ratio},
                          {"consistent", r.consistent}});
    }
    return {{"model", to_json(state.model)},
            {"options",
             {{"trunc_extra", state.opts.trunc_extra},
              {"extend_tracefree", state.opts.extend_tracefree},
              {"tol", state.opts.tol}}},
            {"fields", {{"s", to_json(state.fields.s)}, {"ht", ht}, {"eta", eta}}},
            {"stages", stages},
            {"residual_orders", to_json(residual_orders(state, state.opts.tol))},
            {"obstructions", to_json(vol.obstructions)},
            {"volume",
             {{"density", to_json(vol.density)},
              {"v", vol.v},
              {"c", vol.c},
              {"L", vol.L},
              {"L_imag", vol.L_imag},
              {"vol_M", vol.vol_M}}}};
}

} // namespace ach
