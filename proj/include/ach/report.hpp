#pragma once

// JSON serialization of models, jets and run results, and the run configuration
// read by the command-line tool. Complex numbers are [re, im] pairs.

#include "ach/solver.hpp"
#include "ach/volume.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ach {

using Json = nlohmann::ordered_json;

Json to_json(Complex z);
Json to_json(const LaurentJet& a);
Json to_json(const PhmModel& m);
Json to_json(const std::vector<OrderEntry>& table);
Json to_json(const Obstructions& ob);
Json to_json(const VolumeProfile& p);

// Model file schema: {n, vol_M, h: [[re, im], ...] (n*n, row-major), brackets: [{J, K, L, re, im}]}
// with labels "T", "W1".."Wn", "Wb1".."Wbn". Only one ordering of each bracket is needed.
// Throws InvalidArgument naming the offending field; the model is validated afterwards.
PhmModel model_from_json(const Json& j);

struct ModelSpec {
    std::string builtin = "flat";  // flat | torsion | product | corpus | custom | file
    int n = 1;
    Complex a{0.3, 0.0};
    double h1 = 1.0;
    double vol_M = 1.0;
    bool random = false;  // draw a and h1 from the seed (torsion and product only)
    std::string name;     // corpus entry or file path
    Json custom;          // inline model for builtin "custom"
};

struct SweepSpec {
    std::string family = "rotation";  // rotation | degenerating
    double rate = 1.0;
    double t0 = 0.0;
    double t1 = 1.0;
    int points = 11;
};

struct RunConfig {
    ModelSpec model;
    SolverOptions solver;
    SweepSpec sweep;
    std::vector<double> upsilon{-0.3, 0.2, 0.5};
    std::vector<double> eps{-1e-2, -1e-3};
    double eps0 = -0.1;
    std::vector<int> flat_n{1, 2, 3};
    std::uint64_t seed = 0;
};

// Missing keys keep their defaults; unknown keys and wrong types throw InvalidArgument.
RunConfig config_from_json(const Json& j);
PhmModel build_model(const ModelSpec& spec, std::uint64_t seed);

// Model echo, jets of s, h~, eta~, stage records, order table, obstructions, v, c, L.
Json solve_report(const SolverState& state, const VolumeReport& vol);

} // namespace ach
