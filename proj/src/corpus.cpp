#include "ach/corpus.hpp"

#include <cmath>
#include <numbers>

namespace ach {

namespace {

MatrixC scalar(Complex v) { return MatrixC::Constant(1, 1, v); }

} // namespace

std::vector<CorpusEntry> corpus()
{
    std::vector<CorpusEntry> out;
    for (int n = 1; n <= 3; ++n) {
        out.push_back({"flat_n" + std::to_string(n), flat_heisenberg(n, MatrixC::Identity(n, n))});
    }
    MatrixC h2(2, 2);
    h2 << 2.0, Complex(0.3, 0.4), Complex(0.3, -0.4), 1.0;
    out.push_back({"flat_n2_hermitian", flat_heisenberg(2, h2)});
    out.push_back({"torsion_n1", torsion_deformed(1, scalar(1.0), scalar(0.3))});
    out.push_back({"torsion_n1_complex", torsion_deformed(1, scalar(2.0), scalar(Complex(0.4, -0.2)))});
    out.push_back({"product_n2", torsion_product(2, Complex(0.3, 0.1), 1.3)});
    out.push_back({"product_n2_integrable", torsion_product(2, 0.0, 1.3)});
    out.push_back({"product_n3", torsion_product(3, Complex(0.2, -0.1), 0.8)});

    const PhmModel t1 = torsion_deformed(1, scalar(1.0), scalar(0.3));
    MatrixC F(2, 2);
    F << Complex(1.2, 0.3), Complex(0.2, -0.1), Complex(0.2, 0.1), Complex(1.2, -0.3);
    out.push_back({"torsion_n1_frame", change_frame(t1, F)});
    out.push_back({"torsion_n1_rescaled", rescale_contact_form(t1, 0.25)});
    const PhmModel p2 = torsion_product(2, Complex(0.3, 0.1), 1.3);
    out.push_back({"product_n2_rotated", deform_J(p2, JFamily::rotation(p2.h(), 1.0), 0.3)});
    return out;
}

PhmModel random_torsion_model(int n, std::mt19937_64& rng, double max_a)
{
    std::uniform_real_distribution<double> radius(0.0, max_a);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> levi(0.5, 2.0);
    const Complex a = std::polar(radius(rng), angle(rng));
    const double h1 = levi(rng);
    if (n == 1) {
        return torsion_deformed(1, scalar(h1), scalar(a));
    }
    return torsion_product(n, a, h1);
}

} // namespace ach
