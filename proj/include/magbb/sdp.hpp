// Dense semidefinite programming for small fixed-size problems:
//   minimize   trace(A * X)
//   subject to trace(B_i * X) {=, <=, >=} b_i,   X >= 0 (PSD)
// sized for the 7x7 lifted variable of the current-design problem. The
// solver is a primal-dual interior-point method; see src/sdp.cpp.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace magbb::sdp {

enum class Relation { eq, le, ge };

struct Constraint {
    Eigen::MatrixXd matrix;  // symmetric n x n
    Relation relation = Relation::eq;
    double rhs = 0.0;
};

/// Validated problem statement. Construction enforces symmetry of the
/// objective and every constraint matrix (1e-12), matching dimensions and a
/// non-empty constraint list.
struct SdpProblem {
    Eigen::MatrixXd objective;
    std::vector<Constraint> constraints;

    SdpProblem(Eigen::MatrixXd objective_matrix, std::vector<Constraint> constraint_list);
    int dimension() const { return static_cast<int>(objective.rows()); }
};

enum class SolveStatus { optimal, infeasible, max_iterations };

std::string to_string(SolveStatus status);

struct SdpSolution {
    Eigen::MatrixXd x_matrix;
    SolveStatus status = SolveStatus::max_iterations;
    double objective_value = 0.0;
    /// Worst constraint violation, relative to max(1, |rhs|).
    double feasibility_residual = 0.0;
    Eigen::VectorXd eigenvalues;  // of x_matrix, ascending
    double duality_gap = 0.0;
    int iterations = 0;
};

struct SolveOptions {
    double tolerance = 1e-9;
    int max_iterations = 500;
    /// Dual objective beyond this bound flags primal infeasibility.
    double infeasibility_bound = 1e8;
    /// Per-iteration progress on stderr.
    bool verbose = false;
};

SdpSolution solve(const SdpProblem& problem, const SolveOptions& options = {});

inline SdpSolution solve(const SdpProblem& problem, double tolerance, int max_iterations) {
    SolveOptions options;
    options.tolerance = tolerance;
    options.max_iterations = max_iterations;
    return solve(problem, options);
}

/// Feasibility audit of a candidate X, computed from the problem data alone
/// (independent of any solver state).
struct ResidualReport {
    Eigen::VectorXd constraint_values;  // trace(B_i * X)
    Eigen::VectorXd signed_residuals;   // trace(B_i * X) - rhs_i
    Eigen::VectorXd violations;         // relation-aware, nonnegative
    double min_eigenvalue = 0.0;
    double psd_violation = 0.0;         // max(0, -min_eigenvalue)
    double objective_value = 0.0;
    double max_violation = 0.0;         // over constraints only
};

ResidualReport validate(const SdpProblem& problem, const Eigen::MatrixXd& x_matrix);

inline ResidualReport validate(const SdpProblem& problem, const SdpSolution& solution) {
    return validate(problem, solution.x_matrix);
}

}  // namespace magbb::sdp
