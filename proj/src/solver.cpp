#include "khess/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "khess/errors.hpp"
#include "khess/report.hpp"

namespace khess {

std::string to_string(LinearSolverKind kind) {
    return kind == LinearSolverKind::DirectSparse ? "direct" : "iterative";
}

LinearSolverKind linear_solver_from_string(const std::string& name) {
    if (name == "direct") return LinearSolverKind::DirectSparse;
    if (name == "iterative") return LinearSolverKind::Iterative;
    throw DomainError("unknown linear solver '" + name + "' (direct, iterative)");
}

namespace {

using Row = std::vector<std::pair<long, double>>;

void add_derivative(const DiscreteManifold& m, long node, int axis, int order, double coef, Row& row) {
    const int pos = m.position(node, axis);
    const long stride = m.stride(axis);
    const long base = node - pos * stride;
    double sum = 0.0;
    for (const auto& [t, w] : m.stencil(axis, order, pos)) {
        row.emplace_back(base + t * stride, coef * w);
        sum += w;
    }
    row.emplace_back(node, -coef * sum);
}

// Row of partial(partial(v, i, 1), j, 1) at node.
void add_mixed(const DiscreteManifold& m, long node, int i, int j, double coef, Row& row) {
    const int pos = m.position(node, j);
    const long stride = m.stride(j);
    const long base = node - pos * stride;
    double sum = 0.0;
    for (const auto& [t, w] : m.stencil(j, 1, pos)) {
        add_derivative(m, base + t * stride, i, 1, coef * w, row);
        sum += w;
    }
    add_derivative(m, node, i, 1, -coef * sum, row);
}

Eigen::VectorXd gradient_at(const GridDerivatives& d, long node, int n) {
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = d.du.comps[i][node];
    return p;
}

struct StateEval {
    bool in_cone = true;
    double margin = std::numeric_limits<double>::infinity();
    long worst_node = -1;
    Eigen::VectorXd worst_eigenvalues;
    double rnorm = 0.0;
};

StateEval evaluate_state(const EquationSpec& spec, const Eigen::VectorXd& values, const std::vector<long>& nodes) {
    const DiscreteManifold& m = *spec.manifold;
    const int n = m.n();
    const GridDerivatives d = grid_derivatives(ScalarField(spec.manifold, values));
    StateEval st;
    for (long node : nodes) {
        const Eigen::MatrixXd w = augmented_at(spec, d, node);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd lambda = es.eigenvalues() * std::exp(-2.0 * m.omega(node));
        const double margin = cone_margin(lambda, spec.op.cone);
        if (margin < st.margin) {
            st.margin = margin;
            st.worst_node = node;
            st.worst_eigenvalues = lambda;
        }
        if (!in_cone(lambda, spec.op.cone)) {
            st.in_cone = false;
            return st;
        }
        const double r = evaluate(spec.op, lambda) - rhs_at(spec, node, values[node], gradient_at(d, node, n)).value;
        st.rnorm = std::max(st.rnorm, std::abs(r));
    }
    return st;
}

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& rhs, const SolveConfig& cfg) {
    if (cfg.linear_solver == LinearSolverKind::DirectSparse) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw Error("sparse LU factorization failed: " + lu.lastErrorMessage());
        Eigen::VectorXd x = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw Error("sparse LU solve failed");
        return x;
    }
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> it;
    it.setTolerance(cfg.iterative_tol);
    it.setMaxIterations(cfg.iterative_max_iters);
    it.compute(J);
    Eigen::VectorXd x = it.solve(rhs);
    if (it.info() != Eigen::Success) {
        throw Error("iterative linear solve did not converge (error " + format_real(it.error()) + " after " +
                    std::to_string(it.iterations()) + " iterations)");
    }
    return x;
}

}  // namespace

Linearization linearize(const EquationSpec& spec, const ScalarField& u) {
    const DiscreteManifold& m = *spec.manifold;
    if (!u.manifold->same_shape(m)) throw DomainError("field and equation live on different manifolds");
    const int n = m.n();
    const GridDerivatives d = grid_derivatives(u);
    Linearization lin;
    lin.unknowns = equation_nodes(m);
    std::vector<long> column(static_cast<std::size_t>(m.node_count()), -1);
    for (std::size_t k = 0; k < lin.unknowns.size(); ++k) column[lin.unknowns[k]] = static_cast<long>(k);
    lin.residual.resize(static_cast<Eigen::Index>(lin.unknowns.size()));
    lin.min_ellipticity = std::numeric_limits<double>::infinity();
    lin.cone_margin = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Triplet<double>> triplets;
    Row row;
    for (std::size_t k = 0; k < lin.unknowns.size(); ++k) {
        const long node = lin.unknowns[k];
        const Eigen::MatrixXd w = augmented_at(spec, d, node);
        const Eigen::MatrixXd g = m.metric(node);
        const Eigen::MatrixXd gi = m.metric_inverse(node);
        MatrixDerivative md;
        try {
            md = matrix_derivative(spec.op, g, w);
        } catch (const ConeViolation& e) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
            const Eigen::VectorXd lambda = es.eigenvalues() * std::exp(-2.0 * m.omega(node));
            throw ConeViolation(std::string(e.what()) + " at node " + std::to_string(node), e.failing_index,
                                e.failing_value, node,
                                std::vector<double>(lambda.data(), lambda.data() + lambda.size()));
        }
        lin.cone_margin = std::min(lin.cone_margin, cone_margin(md.eigenvalues, spec.op.cone));
        const Eigen::MatrixXd& F = md.dF;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fes(F, Eigen::EigenvaluesOnly);
        const double ell = fes.eigenvalues().minCoeff();
        if (!(ell > 0.0)) {
            throw ConeViolation("F^{ij} is not positive definite at node " + std::to_string(node), 0, ell, node);
        }
        lin.min_ellipticity = std::min(lin.min_ellipticity, ell);

        const Eigen::VectorXd p = gradient_at(d, node, n);
        const RhsValue rhs = rhs_at(spec, node, u.values[node], p);
        lin.residual[static_cast<Eigen::Index>(k)] = md.value - rhs.value;

        row.clear();
        for (int i = 0; i < n; ++i) {
            if (!m.axis_active(i)) continue;
            add_derivative(m, node, i, 2, F(i, i), row);
            for (int j = i + 1; j < n; ++j) {
                if (m.axis_active(j)) add_mixed(m, node, i, j, 2.0 * F(i, j), row);
            }
        }
        const double a = spec.a_nodes[node];
        const double b = spec.b_nodes[node];
        const Eigen::VectorXd Fp = F * p;
        const Eigen::VectorXd gip = gi * p;
        const double trFg = (F * g).trace();
        for (int q = 0; q < n; ++q) {
            if (!m.axis_active(q)) continue;
            double c = 2.0 * a * Fp[q] + 2.0 * b * trFg * gip[q] - rhs.dp[q];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) c -= F(i, j) * m.gamma(node, q, i, j);
            add_derivative(m, node, q, 1, c, row);
        }
        row.emplace_back(node, -rhs.dz);
        for (const auto& [col, v] : row) {
            const long c = column[col];
            if (c >= 0) triplets.emplace_back(static_cast<int>(k), static_cast<int>(c), v);
        }
    }
    const auto size = static_cast<Eigen::Index>(lin.unknowns.size());
    lin.jacobian.resize(size, size);
    lin.jacobian.setFromTriplets(triplets.begin(), triplets.end());
    lin.jacobian.makeCompressed();
    return lin;
}

SolveReport newton_solve(const EquationSpec& spec, const ScalarField& u0, const SolveConfig& cfg) {
    if (!(cfg.residual_tol > 0) || !(cfg.cone_margin > 0)) throw DomainError("residual_tol and cone_margin must be positive");
    if (!(cfg.backtrack > 0 && cfg.backtrack < 1)) throw DomainError("backtrack factor must lie in (0, 1)");
    const DiscreteManifold& m = *spec.manifold;
    if (!u0.manifold->same_shape(m)) throw DomainError("field and equation live on different manifolds");
    const std::vector<long> nodes = equation_nodes(m);

    const StateEval first = evaluate_state(spec, u0.values, nodes);
    if (!first.in_cone) residual(spec, u0);  // throws with the offending node
    if (first.margin < cfg.cone_margin) {
        const Eigen::VectorXd& l = first.worst_eigenvalues;
        throw ConeViolation("initial state has cone margin " + format_real(first.margin) + " < " +
                                format_real(cfg.cone_margin) + " at node " + std::to_string(first.worst_node),
                            0, first.margin, first.worst_node, std::vector<double>(l.data(), l.data() + l.size()));
    }

    SolveReport rep;
    rep.min_cone_margin_seen = first.margin;
    rep.margin_history.push_back(first.margin);
    rep.min_ellipticity = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u = u0.values;
    for (int it = 0;; ++it) {
        const Linearization lin = linearize(spec, ScalarField(spec.manifold, u));
        const double rnorm = lin.residual.size() ? lin.residual.lpNorm<Eigen::Infinity>() : 0.0;
        rep.residual_history.push_back(rnorm);
        rep.min_ellipticity = std::min(rep.min_ellipticity, lin.min_ellipticity);
        if (rnorm <= cfg.residual_tol) {
            rep.converged = true;
            rep.status = "converged";
            break;
        }
        if (it == cfg.max_iters) {
            rep.status = "iteration limit reached";
            break;
        }
        const Eigen::VectorXd delta = solve_linear(lin.jacobian, -lin.residual, cfg);
        bool accepted = false;
        Eigen::VectorXd trial;
        double alpha = 1.0;
        StateEval st;
        for (; alpha >= cfg.min_step; alpha *= cfg.backtrack) {
            trial = u;
            for (std::size_t k = 0; k < lin.unknowns.size(); ++k) trial[lin.unknowns[k]] += alpha * delta[static_cast<Eigen::Index>(k)];
            st = evaluate_state(spec, trial, nodes);
            if (st.in_cone && st.margin >= cfg.cone_margin && st.rnorm < rnorm) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            rep.status = "step collapse below minimum step";
            break;
        }
        u = std::move(trial);
        ++rep.iterations;
        rep.step_history.push_back(alpha);
        rep.margin_history.push_back(st.margin);
        rep.min_cone_margin_seen = std::min(rep.min_cone_margin_seen, st.margin);
    }
    rep.final_u = ScalarField(spec.manifold, std::move(u));
    return rep;
}

SolveReport continuation_solve(const std::function<EquationSpec(double)>& family, const ScalarField& u0, int steps,
                               const SolveConfig& cfg) {
    if (steps < 1) throw DomainError("continuation needs at least one step");
    SolveReport total;
    total.min_cone_margin_seen = std::numeric_limits<double>::infinity();
    total.min_ellipticity = std::numeric_limits<double>::infinity();
    ScalarField u = u0;
    for (int s = 1; s <= steps; ++s) {
        const double tau = static_cast<double>(s) / steps;
        SolveReport rep;
        try {
            rep = newton_solve(family(tau), u, cfg);
        } catch (const ConeViolation& e) {
            total.status = std::string("stage failed: ") + e.what();
            total.failed_tau = tau;
            total.final_u = u;
            return total;
        }
        total.iterations += rep.iterations;
        total.residual_history.insert(total.residual_history.end(), rep.residual_history.begin(), rep.residual_history.end());
        total.step_history.insert(total.step_history.end(), rep.step_history.begin(), rep.step_history.end());
        total.margin_history.insert(total.margin_history.end(), rep.margin_history.begin(), rep.margin_history.end());
        total.min_cone_margin_seen = std::min(total.min_cone_margin_seen, rep.min_cone_margin_seen);
        total.min_ellipticity = std::min(total.min_ellipticity, rep.min_ellipticity);
        total.final_u = rep.final_u;
        if (!rep.converged) {
            total.status = "stage failed: " + rep.status;
            total.failed_tau = tau;
            return total;
        }
        u = rep.final_u;
    }
    total.converged = true;
    total.status = "converged";
    return total;
}

std::string SolveReport::to_text() const {
    std::ostringstream os;
    auto list = [&os](const char* key, const std::vector<double>& v) {
        os << key;
        for (double x : v) os << ' ' << format_real(x);
        os << '\n';
    };
    os << "status " << status << '\n';
    os << "converged " << (converged ? "true" : "false") << '\n';
    os << "iterations " << iterations << '\n';
    os << "final_residual " << format_real(residual_history.empty() ? 0.0 : residual_history.back()) << '\n';
    os << "min_cone_margin_seen " << format_real(min_cone_margin_seen) << '\n';
    os << "min_ellipticity " << format_real(min_ellipticity) << '\n';
    if (failed_tau) os << "failed_tau " << format_real(*failed_tau) << '\n';
    list("residual_history", residual_history);
    list("step_history", step_history);
    list("margin_history", margin_history);
    return os.str();
}

ScalarField smooth_noise(const ManifoldPtr& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> freq(0, 1);
    const int A = m->active_axes();
    const double L = m->L();
    struct Mode {
        double a;
        std::vector<int> k;
        double phi;
    };
    std::vector<Mode> modes(6);
    for (Mode& md : modes) {
        md.a = amp(rng);
        md.k.resize(A);
        for (int& k : md.k) k = freq(rng);
        md.phi = phase(rng);
    }
    // one period across the torus, half a period across a Dirichlet box
    const double wave = (m->periodic() ? 2.0 : 1.0) * std::numbers::pi / L;
    Eigen::VectorXd v(m->node_count());
    for (long node = 0; node < m->node_count(); ++node) {
        const Eigen::VectorXd x = m->coords(node);
        double s = 0.0;
        for (const Mode& md : modes) {
            double arg = md.phi;
            for (int i = 0; i < A; ++i) arg += wave * md.k[i] * x[i];
            s += md.a * std::cos(arg);
        }
        if (!m->periodic()) {
            for (int i = 0; i < A; ++i) s *= std::cos(std::numbers::pi * x[i] / L);
        }
        v[node] = s;
    }
    if (!m->periodic()) {
        for (long node = 0; node < m->node_count(); ++node)
            if (m->is_boundary(node)) v[node] = 0.0;
    }
    // unit C^2 size on the grid
    double peak = v.cwiseAbs().maxCoeff();
    for (int i = 0; i < A; ++i) {
        peak = std::max(peak, partial(*m, v, i, 1).cwiseAbs().maxCoeff());
        peak = std::max(peak, partial(*m, v, i, 2).cwiseAbs().maxCoeff());
        for (int j = i + 1; j < A; ++j) peak = std::max(peak, partial2(*m, v, i, j).cwiseAbs().maxCoeff());
    }
    if (peak > 0) v /= peak;
    return ScalarField(m, std::move(v));
}

}  // namespace khess
