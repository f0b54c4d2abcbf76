#pragma once

// Manifolds presented by a global frame e_1..e_dim: either constant structure
// constants (Lie backend) or coordinate vector fields on an embedded
// submanifold of R^m sampled at points (Chart backend).

#include "kmu/expr.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kmu {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Covec = Eigen::RowVectorXd;

/// Components of a vector field relative to the frame.
using FrameVector = Vec;

inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultSeed = 42;

enum class Backend { Lie, Chart };

/// Almost contact metric tensors with constant components in the frame.
struct ContactMetricStructure {
    Mat phi;    // column j = phi(e_j)
    Vec xi;
    Covec eta;
    Mat g;

    [[nodiscard]] int dim() const { return static_cast<int>(xi.size()); }
};

/// Bracket table [e_i, e_j] in frame components together with the frame
/// derivatives e_k([e_i, e_j]) of the structure functions.
class BracketTable {
public:
    BracketTable() = default;
    explicit BracketTable(int dim);

    [[nodiscard]] int dim() const noexcept { return dim_; }

    [[nodiscard]] const Vec& operator()(int i, int j) const { return c_[index(i, j)]; }
    [[nodiscard]] const Vec& derivative(int k, int i, int j) const { return dc_[k * dim_ * dim_ + index(i, j)]; }

    /// Sets [e_i, e_j] = v and [e_j, e_i] = -v.
    void set(int i, int j, const Vec& v);
    void set_derivative(int k, int i, int j, const Vec& v);

    /// [V, W] for vector fields with constant frame components.
    [[nodiscard]] Vec of(const Vec& v, const Vec& w) const;
    /// e_k([V, W]) for constant-component V, W.
    [[nodiscard]] Vec derivative_of(int k, const Vec& v, const Vec& w) const;
    /// Derivative of [V, W] along a constant-component direction U.
    [[nodiscard]] Vec derivative_of(const Vec& u, const Vec& v, const Vec& w) const;

    [[nodiscard]] bool position_independent() const noexcept { return constant_; }

private:
    [[nodiscard]] std::size_t index(int i, int j) const { return static_cast<std::size_t>(i * dim_ + j); }

    int dim_ = 0;
    bool constant_ = true;
    std::vector<Vec> c_;
    std::vector<Vec> dc_;
};

struct ChartData {
    int coords = 0;
    std::vector<std::vector<expr::Expression>> frame;  // frame[a][k]: k-th ambient component of e_a
    std::vector<expr::Expression> constraints;
    std::vector<Vec> samples;
};

/// Frame indices spanning L, Q and the Reeb line.
struct AdaptedBlocks {
    std::vector<int> L;
    std::vector<int> Q;
    int xi = -1;
};

struct ManifoldModel {
    std::string name;
    int dim = 0;
    Backend backend = Backend::Lie;
    BracketTable constants;  // Lie backend
    ChartData chart;         // Chart backend
    std::vector<std::string> frame_names;
    std::optional<ContactMetricStructure> structure;
    std::optional<AdaptedBlocks> blocks;

    [[nodiscard]] std::string frame_name(int i) const;
};

/// Everything the frame calculus needs at one point of the manifold.
struct PointContext {
    std::size_t sample = 0;
    Vec point;   // chart coordinates, empty for the Lie backend
    Mat frame;   // m x dim ambient frame matrix, empty for the Lie backend
    BracketTable brackets;
};

/// Builds the context at sample `sample` (always 0 for the Lie backend).
/// Chart backend throws FrameRankDeficient or SpanResidualExceeded.
PointContext make_context(const ManifoldModel& model, std::size_t sample = 0, double tol = kDefaultTolerance);
std::vector<PointContext> make_contexts(const ManifoldModel& model, double tol = kDefaultTolerance);

[[nodiscard]] inline FrameVector bracket(const PointContext& ctx, int i, int j) { return ctx.brackets(i, j); }

/// Max over index triples of |[e_i,[e_j,e_k]] + cyclic|. Lie backend only.
double jacobi_check(const ManifoldModel& model);

/// Three-dimensional Lie model on {e, f, xi} realizing a (kappa, mu)-space.
/// Throws SasakianLimit when kappa >= 1 - tol.
ManifoldModel make_kmu_model(double kappa, double mu, double tol = kDefaultTolerance);

/// make_kmu_model(0, 0) under its fixture name.
ManifoldModel make_flat_model();

/// The unit sphere S^3 in R^4 with its standard Sasakian structure in the
/// frame {X, Y = phi X, xi}.
ManifoldModel make_s3_model(std::uint64_t seed = kDefaultSeed, int samples = 20);

/// (0, 4) generator with [e, f] perturbed by `delta` * e. Still a Lie algebra
/// and a contact metric manifold, but not a (kappa, mu)-space.
ManifoldModel make_negative_control(double delta = 0.1);

/// Adds `delta` to component k of [e_i, e_j] (and its antisymmetric partner).
ManifoldModel perturb_structure_constant(ManifoldModel model, int i, int j, int k, double delta);

/// Re-expresses the model in the frame e'_a = sum_i basis(i, a) e_i.
/// Lie backend accepts any invertible basis; the Chart backend builds the
/// combined expressions.
ManifoldModel change_frame(const ManifoldModel& model, const Mat& basis);

/// Deterministic standard normal draws (Box-Muller over mt19937_64).
std::vector<double> normal_draws(std::uint64_t seed, std::size_t count);

}  // namespace kmu
