#include "ach/report.hpp"

#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using ach::Json;

namespace {

const fs::path& workdir()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "ach_cli_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write(const std::string& name, const std::string& text)
{
    const fs::path p = workdir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::string& args)
{
    const fs::path out = workdir() / "out.txt";
    const fs::path err = workdir() / "err.txt";
    fs::remove(out);
    const std::string cmd = std::string(ACH_CLI) + " " + args + " --out " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

} // namespace

TEST_CASE("solve flat n=1")
{
    const fs::path cfg = write("flat1.json", R"({"model": {"builtin": "flat", "n": 1}})");
    const Run r = run("solve --config " + cfg.string());
    CHECK(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["volume"]["L"].get<double>() == 0.0);
    CHECK(j["obstructions"]["B"] == Json::parse("[0.0, 0.0]"));
    CHECK(j["pass"] == true);
}

TEST_CASE("solve n=2 torsion")
{
    const fs::path integrable = write("p2i.json", R"({"model": {"builtin": "product", "n": 2, "a": 0, "h1": 1.3}})");
    const Run a = run("solve --config " + integrable.string());
    CHECK(a.code == 0);
    for (const auto& e : Json::parse(a.out)["residual_orders"]) {
        CHECK(e["ok"] == true);
    }

    // With Tanno torsion the stage n+1 residual survives and the run reports failure.
    const fs::path tanno = write("p2.json", R"({"model": {"builtin": "product", "n": 2, "a": [0.3, 0.1], "h1": 1.3}})");
    const Run b = run("solve --config " + tanno.string());
    CHECK(b.code == 1);
    CHECK(Json::parse(b.out)["pass"] == false);
}

TEST_CASE("configuration errors exit with 2")
{
    const fs::path bad = write("bad.json", "{\"model\": {");
    const Run a = run("solve --config " + bad.string());
    CHECK(a.code == 2);
    CHECK(a.err.find("parse error") != std::string::npos);

    const fs::path unknown = write("unknown.json", R"({"model": {"builtin": "flat", "m": 2}})");
    const Run b = run("solve --config " + unknown.string());
    CHECK(b.code == 2);
    CHECK(b.err.find("unknown key 'm'") != std::string::npos);

    const fs::path custom = write("custom.json", R"({"model": {"builtin": "custom", "custom":
        {"n": 1, "h": [[1, 0]], "brackets": [{"J": "W1", "K": "Wb1", "L": "T", "im": 1}]}}})");
    CHECK(run("solve --config " + custom.string()).code == 2);

    CHECK(run("solve --format xml").code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("window errors exit with 4")
{
    const fs::path cfg = write("wide.json", R"({"profile": {"eps": [-0.5]}})");
    CHECK(run("profile --config " + cfg.string()).code == 4);
}

TEST_CASE("sweep over J")
{
    const fs::path flat = write("flat2.json", R"({"model": {"builtin": "flat", "n": 2}})");
    const Run a = run("sweep-j --config " + flat.string());
    CHECK(a.code == 0);
    std::istringstream lines(a.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "t,L,ReB,absO,orders_ok,error");
    int rows = 0;
    while (std::getline(lines, line) && line.rfind("max_dev", 0) != 0) {
        ++rows;
        CHECK(line.find(",0,0,0,1,") != std::string::npos);
    }
    CHECK(rows == 11);
    CHECK(line == "max_dev,0,,,,");

    // The degenerating family loses positivity at t = 1: the last row carries the error.
    const fs::path deg = write("deg.json", R"({"model": {"builtin": "torsion", "n": 1},
        "sweep": {"family": "degenerating", "t0": 0, "t1": 1, "points": 5}})");
    const Run b = run("sweep-j --config " + deg.string() + " --format json");
    CHECK(b.code == 1);
    const Json rows_json = Json::parse(b.out)["rows"];
    REQUIRE(rows_json.size() == 5);
    for (int i = 0; i < 4; ++i) {
        CHECK(rows_json[i]["error"] == "");
    }
    CHECK(rows_json[4]["error"] == "IncompatibleJ");
}

TEST_CASE("rescale, flat and profile checks")
{
    const fs::path t1 = write("t1.json", R"({"model": {"builtin": "torsion", "n": 1, "a": 0.3},
        "rescale": {"upsilon": [0.2]}})");
    const Run a = run("rescale-check --config " + t1.string());
    CHECK(a.code == 0);
    for (const auto& c : Json::parse(a.out)["checks"]) {
        CHECK(c["residual"].get<double>() <= 1e-8);
    }

    const Run b = run("flat-check");
    CHECK(b.code == 0);
    CHECK(Json::parse(b.out)["checks"].size() == 21);

    const fs::path f1 = write("f1.json", R"({"model": {"builtin": "flat", "n": 1}})");
    const Run c = run("profile --config " + f1.string());
    CHECK(c.code == 0);
    for (const auto& row : Json::parse(c.out)["profile"]["rows"]) {
        CHECK(std::abs(row["difference"].get<double>()) <= 1e-12);
    }
}

TEST_CASE("overrides and determinism")
{
    const fs::path cfg = write("rand.json", R"({"model": {"builtin": "torsion", "n": 1, "random": true}})");
    const Run a = run("solve --config " + cfg.string() + " --seed 9 --trunc-extra 6 --tol 1e-10");
    const Run b = run("solve --config " + cfg.string() + " --seed 9 --trunc-extra 6 --tol 1e-10");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const Json j = Json::parse(a.out);
    CHECK(j["options"]["trunc_extra"] == 6);
    CHECK(j["options"]["tol"] == 1e-10);
    const Run c = run("solve --config " + cfg.string() + " --seed 10");
    CHECK(c.out != a.out);
}
