#pragma once

// The bi-Legendrian connection of a pair of complementary Legendrian
// distributions (L, Q), its torsion, and the verification suites built on it.

#include "kmu/curvature.hpp"
#include "kmu/foliation.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kmu {

/// Block projectors in the adapted frame.
struct Projectors {
    Mat L, Q, xi;
};

/// Model re-expressed in a frame ordered (L block, Q block, Reeb direction).
struct AdaptedFrame {
    ManifoldModel model;           // carries the transformed structure
    ContactMetricStructure structure;
    Mat basis;                     // columns: new frame vectors in the old frame
    Projectors projectors;
    int n = 0;                     // half dimension

    [[nodiscard]] int xi_index() const { return 2 * n; }
    [[nodiscard]] bool in_l(int i) const { return i < n; }
    [[nodiscard]] bool in_q(int i) const { return i >= n && i < 2 * n; }
};

/// Builds the adapted frame from bases of L and Q. `reeb` defaults to s.xi;
/// any nonzero multiple spans the same line. Throws NotComplementary, and
/// ChartFrameNotAdapted when a Chart-backend frame field does not already lie
/// in one block.
AdaptedFrame adapted_frame(const ManifoldModel& model, const ContactMetricStructure& s, const DistributionBasis& l,
                           const DistributionBasis& q, const std::optional<Vec>& reeb = std::nullopt,
                           double tol = kDefaultTolerance);

/// Frame-aligned blocks declared in the model file.
AdaptedFrame adapted_frame(const ManifoldModel& model, const ContactMetricStructure& s, const AdaptedBlocks& blocks,
                           double tol = kDefaultTolerance);

/// H(V, W): the section of D with d eta(H, Z) = (L_V i_W d eta)(Z) for Z in D.
/// Throws SingularRestriction when d eta is degenerate on D.
FrameVector h_operator(const PointContext& ctx, const ContactMetricStructure& s, const Vec& v, const Vec& w);

struct BiLegConnection {
    Connection connection;  // in the adapted frame
    int n = 0;
};

/// Requires contexts of the adapted model.
BiLegConnection bileg_connection(const PointContext& ctx, const AdaptedFrame& frame);

/// torsion[i * dim + j] = T(e_i, e_j).
struct TorsionField {
    int dim = 0;
    std::vector<Vec> values;
    [[nodiscard]] const Vec& operator()(int i, int j) const { return values[static_cast<std::size_t>(i * dim + j)]; }
};

TorsionField torsion(const PointContext& ctx, const Connection& connection);

/// Named residuals of the defining properties and torsion identities.
std::map<std::string, double> check_axioms(const PointContext& ctx, const Connection& connection,
                                           const AdaptedFrame& frame);

enum class Tensor { Phi, H, G, Eta, DEta };

/// max entry of nabla(tensor) over all frame directions.
double check_parallel(const PointContext& ctx, const Connection& connection, const ContactMetricStructure& s,
                      Tensor tensor);

/// max over D-pairs of |nablabar_X Y - nabla_X Y + eta(nabla_X Y) xi|.
double levi_civita_relation(const Connection& bileg, const Connection& levi_civita, const AdaptedFrame& frame);

struct MetricEquivalence {
    bool nabla_g = false;
    bool nabla_phi = false;
    bool explicit_formulas = false;
    bool totally_geodesic = false;
    double nabla_g_residual = 0.0;
    double nabla_phi_residual = 0.0;
    double explicit_residual = 0.0;
    double geodesic_residual = 0.0;
    bool consistent = false;  // all four agree
};

MetricEquivalence metric_equivalence_suite(std::span<const PointContext> contexts, const AdaptedFrame& frame,
                                           double tol = kDefaultTolerance);

enum class VerdictState { Pass, Fail, NotApplicable };
std::string_view to_string(VerdictState v);

struct TheoremReport {
    VerdictState verdict = VerdictState::NotApplicable;
    std::string reason;
    std::map<std::string, double> conditions;  // worst residual per condition
    bool conditions_hold = false;
    std::optional<KappaMuReport> kappa_mu;     // fit without gating
    bool nullity_holds = false;
    bool matches_eigenspaces = false;
};

/// Connection characterization of (kappa, mu)-spaces checked against
/// independent curvature extraction. K-contact input is NotApplicable.
/// Throws NotKappaMu when the connection conditions hold but the curvature
/// is not of nullity type.
TheoremReport theorem_main_suite(const ManifoldModel& model, const ContactMetricStructure& s,
                                 double tol = kDefaultTolerance);

struct TanakaWebster {
    Connection connection;
    std::map<std::string, double> residuals;  // nabla g, nabla phi, nabla xi, nabla eta, torsion on D
};

/// nablahat = nablabar along D, nablahat_xi W = -phi h W + [xi, W].
TanakaWebster tanaka_webster(const PointContext& ctx, const BiLegConnection& bileg, const AdaptedFrame& frame);

/// max entrywise change of the connection coefficients under deform(s, a),
/// both computed in the same adapted frame.
double connection_deformation_invariance(const ManifoldModel& model, const ContactMetricStructure& s, double a,
                                         const DistributionBasis& l, const DistributionBasis& q,
                                         double tol = kDefaultTolerance);

}  // namespace kmu
