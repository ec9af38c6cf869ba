#pragma once

// Named models shared by the tests, the acceptance run and the CLI builtins.

#include "ach/model.hpp"

#include <random>
#include <string>
#include <vector>

namespace ach {

struct CorpusEntry {
    std::string name;
    PhmModel model;
};

// Fixed list covering flat, torsion, non-integrable, frame-changed and rescaled models for n = 1..3.
std::vector<CorpusEntry> corpus();

// n = 1: torsion_deformed with Levi form in [0.5, 2] and |a| <= max_a.
// n >= 2: torsion_product with the same ranges (torsion_deformed fails Jacobi there).
PhmModel random_torsion_model(int n, std::mt19937_64& rng, double max_a = 0.5);

} // namespace ach
