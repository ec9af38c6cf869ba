#include "ach/corpus.hpp"
#include "ach/report.hpp"

#include "support.hpp"

using namespace ach;

TEST_CASE("complex numbers and jets")
{
    CHECK(to_json(Complex{1.5, -2.0}) == Json::parse("[1.5, -2.0]"));
    const Json j = to_json(LaurentJet(-1, {2.0, Complex{0.0, 1.0}}));
    CHECK(j["min_deg"] == -1);
    CHECK(j["trunc"] == 1);
    CHECK(j["coeffs"] == Json::parse("[[2.0, 0.0], [0.0, 1.0]]"));
}

TEST_CASE("model files round trip")
{
    for (const auto& e : corpus()) {
        CAPTURE(e.name);
        const PhmModel back = model_from_json(to_json(e.model));
        CHECK(back.n() == e.model.n());
        CHECK(max_difference(back.c(), e.model.c()) == 0.0);
        CHECK((back.h() - e.model.h()).norm() == 0.0);
        CHECK(back.vol_M() == e.model.vol_M());
    }
}

TEST_CASE("model file from hand")
{
    const Json j = Json::parse(R"({"n": 1, "vol_M": 2.0, "h": [[1, 0]],
        "brackets": [{"J": "W1", "K": "Wb1", "L": "T", "re": 0, "im": -1},
                     {"J": "T", "K": "W1", "L": "Wb1", "re": 0.3, "im": 0},
                     {"J": "T", "K": "Wb1", "L": "W1", "re": 0.3, "im": 0}]})");
    const PhmModel m = model_from_json(j);
    const PhmModel t = torsion_deformed(1, MatrixC::Identity(1, 1), MatrixC::Constant(1, 1, 0.3));
    CHECK(max_difference(m.c(), t.c()) == 0.0);
    CHECK(m.vol_M() == 2.0);
}

TEST_CASE("model file diagnostics")
{
    auto code = [](const char* text) { return error_of([&] { model_from_json(Json::parse(text)); }); };
    CHECK(code(R"({"n": 1, "h": [[1, 0]]})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"n": 0, "h": [], "brackets": []})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"n": 1, "h": [[1, 0], [0, 0]], "brackets": []})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"n": 1, "h": [[1, 0]], "brackets": [{"J": "W2", "K": "T", "L": "T"}]})") ==
          ErrorCode::InvalidArgument);
    CHECK(code(R"({"n": 1, "h": [[1, 0]], "brackets": [], "extra": 1})") == ErrorCode::InvalidArgument);
    // Schema-valid but violates the contact convention.
    CHECK(code(R"({"n": 1, "h": [[1, 0]], "brackets": [{"J": "W1", "K": "Wb1", "L": "T", "im": 1}]})") ==
          ErrorCode::ValidationFailed);

    try {
        model_from_json(Json::parse(R"({"n": 1, "h": [[1, 0]], "brackets": [{"J": "W1", "K": "X", "L": "T"}]})"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("model.brackets[0].K") != std::string::npos);
    }
}

TEST_CASE("run configuration")
{
    const RunConfig d = config_from_json(Json::object());
    CHECK(d.model.builtin == "flat");
    CHECK(d.sweep.points == 11);
    CHECK(d.solver.tol == 1e-9);

    const RunConfig c = config_from_json(Json::parse(R"({
        "model": {"builtin": "product", "n": 2, "a": [0.3, 0.1], "h1": 1.3},
        "solver": {"trunc_extra": 8, "tol": 1e-10},
        "sweep": {"family": "degenerating", "t0": 0, "t1": 0.5, "points": 3},
        "rescale": {"upsilon": [0.1]},
        "profile": {"eps": [-0.02], "eps0": -0.05},
        "flat_check": {"n": [2]},
        "seed": 5})"));
    CHECK(c.model.a == Complex{0.3, 0.1});
    CHECK(c.solver.trunc_extra == 8);
    CHECK(c.sweep.family == "degenerating");
    CHECK(c.upsilon == std::vector<double>{0.1});
    CHECK(c.eps0 == -0.05);
    CHECK(c.flat_n == std::vector<int>{2});
    CHECK(c.seed == 5);

    auto code = [](const char* text) { return error_of([&] { config_from_json(Json::parse(text)); }); };
    CHECK(code(R"({"modle": {}})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"model": {"builtin": "sphere"}})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"model": {"n": "two"}})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"sweep": {"points": 0}})") == ErrorCode::InvalidArgument);
    CHECK(code(R"({"rescale": {"upsilon": []}})") == ErrorCode::InvalidArgument);
}

TEST_CASE("builtin models")
{
    ModelSpec s;
    s.builtin = "torsion";
    s.n = 1;
    s.a = 0.3;
    CHECK(max_difference(build_model(s, 0).c(),
                         torsion_deformed(1, MatrixC::Identity(1, 1), MatrixC::Constant(1, 1, 0.3)).c()) == 0.0);
    s.random = true;
    CHECK(max_difference(build_model(s, 3).c(), build_model(s, 3).c()) == 0.0);
    CHECK(max_difference(build_model(s, 3).c(), build_model(s, 4).c()) > 0.0);

    ModelSpec c;
    c.builtin = "corpus";
    c.name = "product_n3";
    CHECK(build_model(c, 0).n() == 3);
    c.name = "nope";
    CHECK(error_of([&] { build_model(c, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("solve report")
{
    const SolverState st = solve(flat_heisenberg(1, MatrixC::Identity(1, 1)));
    const Json r = solve_report(st, expansion(st));
    for (const char* key : {"model", "options", "fields", "stages", "residual_orders", "obstructions", "volume"}) {
        CHECK(r.contains(key));
    }
    CHECK(r["fields"]["ht"].size() == 4);
    CHECK(r["volume"]["v"].size() == 3);
    CHECK(r.dump() == solve_report(st, expansion(st)).dump());
}
