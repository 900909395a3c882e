// Refinement study for a manufactured problem, printed as CSV.

#include <iostream>

#include <mameshfree/mameshfree.hpp>

int main(int argc, char** argv) {
    using namespace mameshfree;

    const std::string name = argc > 1 ? argv[1] : "MA1";
    const Problem problem = make_problem(name, Domain::unit_disk());

    SolverConfig cfg;
    cfg.tol = 1e-8;
    cfg.max_iters = 120;
    // Weight the boundary rows: the unweighted optimum drifts along the
    // affine direction the determinant cannot see, and the drift does not
    // shrink under refinement.
    cfg.boundary_weight = 16.0;

    const auto rows =
        convergence_study(problem, KernelFamily::C4, 0.3, 3, DeltaRule::fixed(0.7), cfg);
    write_convergence_csv(std::cout, rows);
    return 0;
}
