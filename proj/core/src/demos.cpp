#include "decoupler/demos.hpp"

#include <stdexcept>

namespace decoupler {

namespace {

UnivariatePolynomial poly(std::vector<double> ascending) {
    return UnivariatePolynomial::from_coeffs(std::move(ascending));
}

DemoProblem make_waring() {
    DemoProblem d;
    d.name = "waring";
    d.truth.W.resize(1, 2);
    d.truth.W << 1, 1;
    d.truth.V.resize(2, 2);
    d.truth.V << 1, 2, 3, 4;
    d.truth.g = {poly({5, -1, 0, 3}), poly({-7, 3, 0, -5})};
    return d;
}

DemoProblem make_r3() {
    DemoProblem d;
    d.name = "r3";
    d.truth.W.resize(2, 3);
    d.truth.W << 1, 0, 1, -2, -1, 1;
    d.truth.V.resize(2, 3);
    d.truth.V << 2, 1, 0, 1, 0, 3;
    d.truth.g = {poly({5, 0, -1, 3}), poly({-7, 3, 0, -5}), poly({2, -2, 0, 3})};
    return d;
}

DemoProblem make_r4() {
    DemoProblem d;
    d.name = "r4";
    d.truth.W.resize(2, 4);
    d.truth.W << 1, 0, 1, 2, -2, -1, 1, 3;
    d.truth.V.resize(2, 4);
    d.truth.V << 2, 1, 0, 1, 1, 0, 3, -1;
    d.truth.g = {poly({5, 0, -1, 3}), poly({-7, 3, 0, -5}), poly({2, -2, 0, 3}),
                 poly({1, 0, -2, 1})};
    return d;
}

}  // namespace

DemoProblem demo_problem(const std::string& name) {
    if (name == "waring") {
        return make_waring();
    }
    if (name == "r3") {
        return make_r3();
    }
    if (name == "r4") {
        return make_r4();
    }
    throw std::invalid_argument("unknown example '" + name + "' (expected waring|r3|r4)");
}

std::vector<std::string> demo_names() {
    return {"waring", "r3", "r4"};
}

}  // namespace decoupler
