#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khess/jet.hpp"

namespace khess {

enum class ChartKind { FlatTorus, EuclideanDomain, SphereChart };

std::string to_string(ChartKind kind);
ChartKind chart_kind_from_string(const std::string& name);

/// Structured chart over the box [-L/2, L/2]^n.
///
/// FlatTorus: periodic, N nodes per axis. EuclideanDomain and SphereChart:
/// N + 1 nodes per axis including the boundary. SphereChart uses stereographic
/// coordinates y of the sphere of radius rho, g = (2 rho / (1 + |y|^2))^2 delta,
/// and needs L sqrt(n) / 2 < 1 so the chart stays inside a hemisphere.
///
/// Only the first `active` axes carry grid points. The remaining axes have a
/// single node at coordinate 0 and every field is taken to be invariant along
/// them; this is allowed on flat charts only.
struct ChartParams {
    ChartKind kind = ChartKind::EuclideanDomain;
    int n = 2;
    int N = 32;
    double L = 2.0;
    double rho = 1.0;
    int active = 0;  ///< 0 means all n axes
};

/// Analytic curvature data at one point, in the index conventions
///   R_ijkl = K (g_ik g_jl - g_il g_jk) on a space form,
///   Ric_jl = g^{ik} R_ijkl,  R = g^{jl} Ric_jl.
struct CurvatureData {
    int n = 0;
    std::vector<double> riemann;    ///< R_ijkl at [((i n + j) n + k) n + l]
    Eigen::MatrixXd ricci;
    double scalar = 0.0;
    std::vector<double> d_ricci;    ///< (nabla_p Ric)_ij at [(i n + j) n + p]
    std::vector<double> d_riemann;  ///< (nabla_p R)_ijkl at [(((i n + j) n + k) n + l) n + p]

    double R(int i, int j, int k, int l) const { return riemann[((i * n + j) * n + k) * n + l]; }
};

class DiscreteManifold {
public:
    explicit DiscreteManifold(const ChartParams& params);

    const ChartParams& params() const { return params_; }
    ChartKind kind() const { return params_.kind; }
    int n() const { return params_.n; }
    int N() const { return params_.N; }
    double L() const { return params_.L; }
    double h() const { return h_; }
    double rho() const { return params_.rho; }
    int active_axes() const { return active_; }
    bool axis_active(int axis) const { return axis < active_; }
    bool periodic() const { return params_.kind == ChartKind::FlatTorus; }
    /// Constant sectional curvature: 0 for flat charts, 1 / rho^2 on the sphere.
    double K() const;

    long node_count() const { return node_count_; }
    int extent(int axis) const { return extent_[axis]; }
    long stride(int axis) const { return stride_[axis]; }
    int position(long node, int axis) const {
        return static_cast<int>((node / stride_[axis]) % extent_[axis]);
    }
    std::vector<int> multi_index(long node) const;
    long node_at(std::span<const int> index) const;
    Eigen::VectorXd coords(long node) const;

    /// True for nodes on the Dirichlet boundary (never on the torus).
    bool is_boundary(long node) const;
    /// Distance, in grid steps, to the nearest boundary node along an active
    /// axis. Effectively infinite on the torus.
    int collar(long node) const;
    /// Distance from the chart origin: Euclidean on flat charts, geodesic
    /// 2 rho atan|y| on the sphere.
    double distance_from_origin(long node) const;
    /// Inverse of distance_from_origin as a coordinate radius.
    double coordinate_radius(double distance) const;

    /// Conformal factor: g = exp(2 omega) delta.
    double omega(long node) const { return omega_[node]; }
    Eigen::MatrixXd metric(long node) const;
    Eigen::MatrixXd metric_inverse(long node) const;
    /// Christoffel symbols Gamma^k_ij at [(k n + i) n + j].
    std::span<const double> christoffel(long node) const {
        return {christoffel_.data() + node * n3_, static_cast<std::size_t>(n3_)};
    }
    double gamma(long node, int k, int i, int j) const {
        return christoffel_[node * n3_ + (k * n() + i) * n() + j];
    }

    /// omega as a function of coordinates given as jets (any variable space).
    Jet omega_jet(std::span<const Jet> x) const;
    /// Unit sphere embedding X(y) of the chart point, as n + 1 jets (sphere only).
    std::vector<Jet> embedding_jet(std::span<const Jet> x) const;
    /// Curvature at a coordinate point, from jets of omega.
    CurvatureData curvature_at(const Eigen::VectorXd& x) const;
    CurvatureData curvature(long node) const { return curvature_at(coords(node)); }

    /// 1D finite-difference stencil of `order` (1 or 2) at `pos` along an active
    /// axis: pairs (target position along the axis, weight), weights already
    /// scaled by h^-order. Periodic wrap is folded into the target positions.
    std::span<const std::pair<int, double>> stencil(int axis, int order, int pos) const;

    bool same_shape(const DiscreteManifold& other) const;

private:
    ChartParams params_;
    int active_ = 0;
    double h_ = 0.0;
    long node_count_ = 0;
    long n3_ = 0;
    std::vector<int> extent_;
    std::vector<long> stride_;
    std::vector<double> omega_;
    std::vector<double> christoffel_;
    // [order - 1][pos] per active axis (identical on every active axis)
    std::vector<std::vector<std::vector<std::pair<int, double>>>> stencils_;
};

using ManifoldPtr = std::shared_ptr<const DiscreteManifold>;

ManifoldPtr make_manifold(const ChartParams& params);

/// Finite-difference weights for the m-th derivative at x0 from samples at xs.
std::vector<double> fornberg_weights(double x0, std::span<const double> xs, int m);

struct ScalarField {
    ManifoldPtr manifold;
    Eigen::VectorXd values;

    ScalarField() = default;
    ScalarField(ManifoldPtr m, Eigen::VectorXd v);
    static ScalarField constant(ManifoldPtr m, double c);
};

/// Covariant tensor field of rank r: n^r component grids, index (i_1 .. i_r)
/// flattened row-major.
struct TensorField {
    ManifoldPtr manifold;
    int rank = 0;
    std::vector<Eigen::VectorXd> comps;

    TensorField() = default;
    TensorField(ManifoldPtr m, int rank);
    int n() const { return manifold->n(); }
    Eigen::VectorXd& at(std::initializer_list<int> idx);
    const Eigen::VectorXd& at(std::initializer_list<int> idx) const;
    /// Component matrix at a node (rank 2 only).
    Eigen::MatrixXd matrix(long node) const;
    void set_matrix(long node, const Eigen::MatrixXd& m);
};

/// Derivative of grid values along an axis (order 1 or 2); zero along
/// inactive axes.
Eigen::VectorXd partial(const DiscreteManifold& m, const Eigen::VectorXd& v, int axis, int order);
/// Mixed second partial: axis-wise composition for a != b.
Eigen::VectorXd partial2(const DiscreteManifold& m, const Eigen::VectorXd& v, int a, int b);

/// du as a covector field.
TensorField covariant_gradient(const ScalarField& u);
/// nabla^2 u_ij = d_i d_j u - Gamma^k_ij d_k u; exactly symmetric.
TensorField covariant_hessian(const ScalarField& u);
/// (nabla T)_{I p} = d_p T_I - sum_s Gamma^m_{p i_s} T_{I[i_s -> m]}.
TensorField covariant_derivative(const TensorField& t);

/// W = nabla^2 u + a du (x) du + b |du|^2 g + B.
TensorField augmented_tensor(const ScalarField& u, const ScalarField& a, const ScalarField& b,
                             const TensorField& B);

/// The metric as a tensor field.
TensorField metric_field(const ManifoldPtr& m);
/// A_g = (Ric - R g / (2 (n - 1))) / (n - 2); n >= 3.
TensorField schouten(const ManifoldPtr& m);

/// |du|^2_g at a node from lower-index components.
double gradient_norm2(const DiscreteManifold& m, long node, const Eigen::VectorXd& du);
/// Largest |eigenvalue| of g^-1 T at a node.
double spectral_norm(const DiscreteManifold& m, long node, const Eigen::MatrixXd& t);

struct CommutationResidual {
    double r3 = 0.0;
    double r4 = 0.0;
    int margin = 0;  ///< boundary collar (grid steps) excluded from the maxima
};

/// Max-norm residuals of the third- and fourth-order commutation identities
///   u_kij - u_ijk - R_mikj u_m
///   u_kkij - u_ijkk - 2 R_mikj u_mk + R_mj u_mi + R_mi u_mj + R_mi,j u_m - R_mikj,k u_m
/// (repeated indices contracted with g). Nodes closer than `margin` steps to a
/// Dirichlet boundary are skipped; the default skips the layers where the
/// nested stencils turn one-sided.
CommutationResidual commutation_residual(const ScalarField& u, int margin = -1);

/// u restricted to the sub-box [-r, r]^(active) of a flat EuclideanDomain
/// chart, as a field on its own EuclideanDomain chart with L = 2 r. The sub-box
/// must be a union of grid cells.
ScalarField restrict_to_box(const ScalarField& u, double r);
/// Maps u on the radius-r ball of a flat EuclideanDomain chart to the unit
/// ball: y = x / r, u~(y) = u(r y) - ln r, on a chart with L = 2. The metric
/// r^-2 E*g is again the flat one, so this is a re-indexing plus a shift.
ScalarField rescale_ball(const ScalarField& u, double r);
/// Inverse of rescale_ball: the field u(x) = u~(x / r) + ln r on the sub-box.
ScalarField unscale_ball(const ScalarField& rescaled, double r);

/// Text grid format, see docs/field_format.md.
void write_field(std::ostream& os, const ScalarField& u);
ScalarField read_field(std::istream& is);

}  // namespace khess
