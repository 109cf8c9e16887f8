// Primal-dual interior-point SDP solver (HKM search direction, Mehrotra
// predictor-corrector). Inequalities are enforced through a nonnegative
// slack block appended to the PSD cone, so the core iteration works on the
// product cone S^n_+ x R^p_+. Dense factorizations throughout; problem
// sizes here are tiny (n <= 16, a handful of constraints).
#include "magbb/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace magbb::sdp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double trace_product(const MatrixXd& a, const MatrixXd& b) {
    return (a.cwiseProduct(b)).sum();  // both symmetric
}

MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Largest alpha with cone_point + alpha * step staying PSD, via the
/// generalized eigenvalue bound on L^-1 * step * L^-T.
double max_step_psd(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& step) {
    MatrixXd w = llt.matrixL().solve(step);
    w = llt.matrixL().solve(w.transpose());
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(w),
                                                      Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues()(0);
    if (lambda_min >= -1e-14) return kInf;
    return -1.0 / lambda_min;
}

double max_step_positive(const VectorXd& point, const VectorXd& step) {
    double alpha = kInf;
    for (Eigen::Index k = 0; k < point.size(); ++k) {
        if (step(k) < 0.0) alpha = std::min(alpha, -point(k) / step(k));
    }
    return alpha;
}

bool factorable(const MatrixXd& m) {
    return Eigen::LLT<MatrixXd>(m).info() == Eigen::Success;
}

struct Direction {
    MatrixXd dx;
    VectorXd dxs;
    VectorXd dy;
    MatrixXd ds;
    VectorXd dss;
};

}  // namespace

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::max_iterations: return "max_iterations";
    }
    return "unknown";
}

SdpProblem::SdpProblem(Eigen::MatrixXd objective_matrix, std::vector<Constraint> constraint_list)
    : objective(std::move(objective_matrix)), constraints(std::move(constraint_list)) {
    const auto n = objective.rows();
    if (n < 1 || objective.cols() != n)
        throw std::invalid_argument("SdpProblem: objective must be square with n >= 1");
    if ((objective - objective.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("SdpProblem: objective matrix not symmetric");
    if (constraints.empty()) throw std::invalid_argument("SdpProblem: constraint list empty");
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& m = constraints[i].matrix;
        if (m.rows() != n || m.cols() != n)
            throw std::invalid_argument("SdpProblem: constraint " + std::to_string(i) +
                                        " has mismatched dimensions");
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("SdpProblem: constraint " + std::to_string(i) +
                                        " matrix not symmetric");
    }
}

ResidualReport validate(const SdpProblem& problem, const Eigen::MatrixXd& x_matrix) {
    const auto n = problem.objective.rows();
    if (x_matrix.rows() != n || x_matrix.cols() != n)
        throw std::domain_error("validate: solution dimension mismatch");

    const auto m = static_cast<Eigen::Index>(problem.constraints.size());
    ResidualReport report;
    report.constraint_values.resize(m);
    report.signed_residuals.resize(m);
    report.violations.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& c = problem.constraints[i];
        const double value = trace_product(c.matrix, x_matrix);
        const double signed_residual = value - c.rhs;
        double violation = 0.0;
        switch (c.relation) {
            case Relation::eq: violation = std::abs(signed_residual); break;
            case Relation::le: violation = std::max(0.0, signed_residual); break;
            case Relation::ge: violation = std::max(0.0, -signed_residual); break;
        }
        report.constraint_values(i) = value;
        report.signed_residuals(i) = signed_residual;
        report.violations(i) = violation;
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrized(x_matrix),
                                                      Eigen::EigenvaluesOnly);
    report.min_eigenvalue = eig.eigenvalues()(0);
    report.psd_violation = std::max(0.0, -report.min_eigenvalue);
    report.objective_value = trace_product(problem.objective, x_matrix);
    report.max_violation = m > 0 ? report.violations.maxCoeff() : 0.0;
    return report;
}

SdpSolution solve(const SdpProblem& problem, const SolveOptions& options) {
    if (!(options.tolerance > 0.0)) throw std::invalid_argument("solve: tolerance must be > 0");

    const int n = problem.dimension();
    const int m = static_cast<int>(problem.constraints.size());
    const MatrixXd& obj = problem.objective;

    // Slack bookkeeping: slack_of[i] is the slack index of constraint i
    // (-1 for equalities); slack_sign is +1 for <= and -1 for >=.
    std::vector<int> slack_of(m, -1);
    std::vector<double> slack_sign;
    std::vector<int> owner;  // constraint owning each slack
    for (int i = 0; i < m; ++i) {
        const Relation rel = problem.constraints[i].relation;
        if (rel == Relation::le || rel == Relation::ge) {
            slack_of[i] = static_cast<int>(slack_sign.size());
            slack_sign.push_back(rel == Relation::le ? 1.0 : -1.0);
            owner.push_back(i);
        }
    }
    const int p = static_cast<int>(slack_sign.size());

    VectorXd b(m);
    for (int i = 0; i < m; ++i) b(i) = problem.constraints[i].rhs;

    // SDPT3-style cold start on the unified cone.
    double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
    double eta = std::max({10.0, std::sqrt(static_cast<double>(n)), obj.norm()});
    for (int i = 0; i < m; ++i) {
        const double bn = problem.constraints[i].matrix.norm();
        xi = std::max(xi, static_cast<double>(n) * (1.0 + std::abs(b(i))) / (1.0 + bn));
        eta = std::max(eta, bn);
    }

    MatrixXd x = xi * MatrixXd::Identity(n, n);
    MatrixXd s = eta * MatrixXd::Identity(n, n);
    VectorXd xs = VectorXd::Constant(p, xi);
    VectorXd ss = VectorXd::Constant(p, eta);
    VectorXd y = VectorXd::Zero(m);

    const double b_scale = 1.0 + b.norm();
    const double obj_scale = 1.0 + obj.norm();
    const double cone_size = static_cast<double>(n + p);

    struct Metrics {
        double pinf, dinf, gap, pobj, dobj, mu;
    };
    const auto measure = [&]() -> Metrics {
        VectorXd rp(m);
        for (int i = 0; i < m; ++i) {
            double v = trace_product(problem.constraints[i].matrix, x);
            if (slack_of[i] >= 0) v += slack_sign[slack_of[i]] * xs(slack_of[i]);
            rp(i) = b(i) - v;
        }
        MatrixXd rd = obj - s;
        for (int i = 0; i < m; ++i) rd -= y(i) * problem.constraints[i].matrix;
        double rdl2 = 0.0;
        for (int k = 0; k < p; ++k) {
            const double r = -ss(k) - slack_sign[k] * y(owner[k]);
            rdl2 += r * r;
        }
        Metrics metrics;
        metrics.pobj = trace_product(obj, x);
        metrics.dobj = b.dot(y);
        metrics.pinf = rp.norm() / b_scale;
        metrics.dinf = std::sqrt(rd.squaredNorm() + rdl2) / obj_scale;
        metrics.gap = std::abs(metrics.pobj - metrics.dobj) /
                      (1.0 + std::abs(metrics.pobj) + std::abs(metrics.dobj));
        metrics.mu = (trace_product(x, s) + xs.dot(ss)) / cone_size;
        return metrics;
    };
    const auto converged = [&](const Metrics& metrics) {
        return metrics.pinf <= options.tolerance && metrics.dinf <= options.tolerance &&
               metrics.gap <= options.tolerance;
    };
    const auto diverged = [&](const Metrics& metrics) {
        return metrics.dobj > options.infeasibility_bound &&
               metrics.dinf <= std::sqrt(options.tolerance);
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Metrics metrics = measure();
        if (options.verbose)
            std::fprintf(stderr,
                         "sdp it %3d  mu %9.3e  pinf %9.3e  dinf %9.3e  gap %9.3e  pobj %.8e\n",
                         iter, metrics.mu, metrics.pinf, metrics.dinf, metrics.gap, metrics.pobj);
        if (converged(metrics) || diverged(metrics)) break;

        const Eigen::LLT<MatrixXd> llt_s(s);
        const Eigen::LLT<MatrixXd> llt_x(x);
        if (llt_s.info() != Eigen::Success || llt_x.info() != Eigen::Success) break;

        VectorXd rp(m);
        for (int i = 0; i < m; ++i) {
            double v = trace_product(problem.constraints[i].matrix, x);
            if (slack_of[i] >= 0) v += slack_sign[slack_of[i]] * xs(slack_of[i]);
            rp(i) = b(i) - v;
        }
        MatrixXd rd = obj - s;
        for (int i = 0; i < m; ++i) rd -= y(i) * problem.constraints[i].matrix;
        VectorXd rdl(p);
        for (int k = 0; k < p; ++k) rdl(k) = -ss(k) - slack_sign[k] * y(owner[k]);
        const double mu = metrics.mu;

        const MatrixXd s_inv = llt_s.solve(MatrixXd::Identity(n, n));

        // Schur complement M_ij = tr(B_i X B_j S^-1) plus the slack diagonal.
        std::vector<MatrixXd> w(m);
        for (int j = 0; j < m; ++j) w[j] = x * problem.constraints[j].matrix * s_inv;
        MatrixXd schur(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                schur(i, j) = (problem.constraints[i].matrix.cwiseProduct(w[j].transpose())).sum();
        for (int k = 0; k < p; ++k) schur(owner[k], owner[k]) += xs(k) / ss(k);
        schur = symmetrized(schur);
        const double ridge = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
        schur.diagonal().array() += ridge;
        Eigen::LDLT<MatrixXd> ldlt(schur);
        if (ldlt.info() != Eigen::Success) {
            schur.diagonal().array() += 1e4 * ridge;
            ldlt.compute(schur);
            if (ldlt.info() != Eigen::Success) break;
        }

        const MatrixXd x_rd_sinv = x * rd * s_inv;

        const auto solve_direction = [&](const MatrixXd& rc, const VectorXd& rcl) {
            Direction d;
            VectorXd rhs(m);
            for (int i = 0; i < m; ++i) {
                rhs(i) = rp(i) - trace_product(problem.constraints[i].matrix, rc) +
                         trace_product(problem.constraints[i].matrix, x_rd_sinv);
                if (slack_of[i] >= 0) {
                    const int k = slack_of[i];
                    rhs(i) += -slack_sign[k] * rcl(k) + slack_sign[k] * xs(k) * rdl(k) / ss(k);
                }
            }
            d.dy = ldlt.solve(rhs);
            d.ds = rd;
            for (int i = 0; i < m; ++i) d.ds -= d.dy(i) * problem.constraints[i].matrix;
            d.ds = symmetrized(d.ds);
            d.dss.resize(p);
            for (int k = 0; k < p; ++k) d.dss(k) = rdl(k) - slack_sign[k] * d.dy(owner[k]);
            d.dx = symmetrized(rc - x * d.ds * s_inv);
            d.dxs.resize(p);
            for (int k = 0; k < p; ++k) d.dxs(k) = rcl(k) - xs(k) * d.dss(k) / ss(k);
            return d;
        };

        // Predictor (affine scaling) step.
        const Direction aff = solve_direction(-x, -xs);
        const double alpha_p_aff =
            std::min({1.0, 0.98 * max_step_psd(llt_x, aff.dx),
                      0.98 * max_step_positive(xs, aff.dxs)});
        const double alpha_d_aff =
            std::min({1.0, 0.98 * max_step_psd(llt_s, aff.ds),
                      0.98 * max_step_positive(ss, aff.dss)});

        const double mu_aff =
            (trace_product(x + alpha_p_aff * aff.dx, s + alpha_d_aff * aff.ds) +
             (xs + alpha_p_aff * aff.dxs).dot(ss + alpha_d_aff * aff.dss)) /
            cone_size;
        const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 1e-8, 1.0);

        // Corrector with the Mehrotra second-order term.
        const MatrixXd rc_corr =
            sigma * mu * s_inv - x - symmetrized(aff.dx * aff.ds * s_inv);
        VectorXd rcl_corr(p);
        for (int k = 0; k < p; ++k)
            rcl_corr(k) = (sigma * mu - aff.dxs(k) * aff.dss(k)) / ss(k) - xs(k);
        const Direction dir = solve_direction(rc_corr, rcl_corr);

        const double tau = 0.98;
        double alpha_p = std::min({1.0, tau * max_step_psd(llt_x, dir.dx),
                                   tau * max_step_positive(xs, dir.dxs)});
        double alpha_d = std::min({1.0, tau * max_step_psd(llt_s, dir.ds),
                                   tau * max_step_positive(ss, dir.dss)});

        // Commit the longest damping of the step that keeps both cone blocks
        // numerically factorable; the exact boundary bound above is not
        // enough once the complementarity plunges near machine precision.
        bool committed = false;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            const MatrixXd x_new = symmetrized(x + alpha_p * dir.dx);
            const MatrixXd s_new = symmetrized(s + alpha_d * dir.ds);
            const VectorXd xs_new = xs + alpha_p * dir.dxs;
            const VectorXd ss_new = ss + alpha_d * dir.dss;
            const bool positive = (p == 0) || (xs_new.minCoeff() > 0.0 && ss_new.minCoeff() > 0.0);
            if (positive && factorable(x_new) && factorable(s_new)) {
                x = x_new;
                s = s_new;
                xs = xs_new;
                ss = ss_new;
                y += alpha_d * dir.dy;
                committed = true;
                break;
            }
            alpha_p *= 0.5;
            alpha_d *= 0.5;
        }
        if (!committed) break;
    }

    const Metrics final_metrics = measure();
    SdpSolution solution;
    if (converged(final_metrics)) {
        solution.status = SolveStatus::optimal;
    } else if (diverged(final_metrics)) {
        solution.status = SolveStatus::infeasible;
    } else {
        solution.status = SolveStatus::max_iterations;
    }

    solution.iterations = iter;
    solution.x_matrix = symmetrized(x);
    solution.objective_value = final_metrics.pobj;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(solution.x_matrix, Eigen::EigenvaluesOnly);
    solution.eigenvalues = eig.eigenvalues();

    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        const auto& c = problem.constraints[i];
        const double value = trace_product(c.matrix, solution.x_matrix);
        double violation = 0.0;
        switch (c.relation) {
            case Relation::eq: violation = std::abs(value - c.rhs); break;
            case Relation::le: violation = std::max(0.0, value - c.rhs); break;
            case Relation::ge: violation = std::max(0.0, c.rhs - value); break;
        }
        worst = std::max(worst, violation / std::max(1.0, std::abs(c.rhs)));
    }
    solution.feasibility_residual = worst;
    solution.duality_gap = final_metrics.gap;
    return solution;
}

}  // namespace magbb::sdp
