#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "khess/equations.hpp"

namespace khess {

enum class LinearSolverKind { DirectSparse, Iterative };

std::string to_string(LinearSolverKind kind);
LinearSolverKind linear_solver_from_string(const std::string& name);

struct SolveConfig {
    int max_iters = 25;
    double residual_tol = 1e-10;
    double backtrack = 0.5;
    double min_step = 1.0 / (1 << 20);
    /// Every accepted iterate keeps cone_margin(g^-1 W) >= this at the equation nodes.
    double cone_margin = 1e-6;
    LinearSolverKind linear_solver = LinearSolverKind::DirectSparse;
    double iterative_tol = 1e-13;
    int iterative_max_iters = 5000;
    std::uint64_t seed = 1;
};

struct SolveReport {
    bool converged = false;
    std::string status;
    int iterations = 0;
    std::vector<double> residual_history;  ///< max-norm before each step and at the end
    std::vector<double> step_history;      ///< accepted damping factors
    std::vector<double> margin_history;    ///< cone margin of each accepted iterate
    double min_cone_margin_seen = 0.0;
    double min_ellipticity = 0.0;          ///< smallest eigenvalue of F^{ij} over the run
    std::optional<double> failed_tau;      ///< continuation parameter of a failed stage
    ScalarField final_u;

    std::string to_text() const;
};

/// Jacobian of the residual at u restricted to the equation nodes.
struct Linearization {
    Eigen::SparseMatrix<double> jacobian;
    Eigen::VectorXd residual;      ///< at the unknowns
    std::vector<long> unknowns;    ///< node of each row / column
    double min_ellipticity = 0.0;  ///< smallest eigenvalue of F^{ij} over the nodes
    double cone_margin = 0.0;
};

/// Principal part F^{ij} D_ij, first-order part from Gamma, a du(x)du, b |du|^2 g and h_p,
/// zero-order part from f_z. Throws ConeViolation off the cone.
Linearization linearize(const EquationSpec& spec, const ScalarField& u);

/// Damped Newton. Each step halves (cfg.backtrack) until the residual max-norm
/// decreases and the cone margin stays >= cfg.cone_margin; a step below
/// cfg.min_step ends the run unconverged. Throws ConeViolation when u0 itself
/// is outside the cone or below the margin.
SolveReport newton_solve(const EquationSpec& spec, const ScalarField& u0, const SolveConfig& cfg);

/// Solves family(tau) for tau = 1/steps, 2/steps, .., 1, warm-starting from u0 (a
/// solution at tau = 0).
SolveReport continuation_solve(const std::function<EquationSpec(double)>& family, const ScalarField& u0,
                               int steps, const SolveConfig& cfg);

/// Smooth random field of unit C^2 size on the grid (the largest of |eta|, |d eta|
/// and |d^2 eta| over the nodes is 1), vanishing on Dirichlet boundaries and
/// periodic on the torus, from a fixed mode set drawn with `seed`.
ScalarField smooth_noise(const ManifoldPtr& m, std::uint64_t seed);

}  // namespace khess
