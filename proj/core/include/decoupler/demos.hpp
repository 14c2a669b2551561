#pragma once

#include "decoupler/model.hpp"

#include <string>
#include <vector>

namespace decoupler {

/// Bundled example models exercised by `decoupler reproduce`:
///  - "waring": single output, two branches; first-order decoupling is
///    a non-unique matrix factorization, second-order recovers it.
///  - "r3": two outputs, three branches; the Jacobian CPD fits but does
///    not identify the factors, the Hessian does.
///  - "r4": two outputs, four branches; not identifiable, yet the
///    second-order decomposition still yields interpretable branches.
struct DemoProblem {
    std::string name;
    DecoupledModel truth;
    int degree = 3;
};

DemoProblem demo_problem(const std::string& name);
std::vector<std::string> demo_names();

}  // namespace decoupler
