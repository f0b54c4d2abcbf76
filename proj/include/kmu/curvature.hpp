#pragma once

// Levi-Civita connection from the Koszul formula, Riemann curvature
// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z, and
// extraction of the nullity constants (kappa, mu).

#include "kmu/contact.hpp"

#include <optional>
#include <span>
#include <vector>

namespace kmu {

/// Linear connection in the frame: coeffs[i].col(j) = nabla_{e_i} e_j.
struct Connection {
    std::vector<Mat> coeffs;
    /// derivatives[k][i] = e_k(coeffs[i]); empty when not computed.
    std::vector<std::vector<Mat>> derivatives;

    [[nodiscard]] int dim() const { return static_cast<int>(coeffs.size()); }
    [[nodiscard]] Vec operator()(int i, int j) const { return coeffs[i].col(j); }
    /// Matrix of nabla_V for a constant-component direction V.
    [[nodiscard]] Mat along(const Vec& v) const;

    /// (nabla_{e_i} A) for an endomorphism field A with frame derivative dA.
    [[nodiscard]] Mat covariant_endo(int i, const Mat& a, const Mat& da) const;
    /// (nabla_{e_i} b)(e_j, e_k) for a bilinear form with constant components.
    [[nodiscard]] Mat covariant_bilinear(int i, const Mat& b) const;
    /// (nabla_{e_i} eta)(e_j) for a constant-component one-form.
    [[nodiscard]] Covec covariant_form(int i, const Covec& eta) const;
};

using ConnectionField = Connection;

/// Koszul formula with constant metric components. Throws SingularMetric.
Connection levi_civita(const PointContext& ctx, const Mat& g);

/// max |nabla_i e_j - nabla_j e_i - [e_i, e_j]|.
double torsion_free_residual(const PointContext& ctx, const Connection& nabla);
/// max |(nabla_i g)(e_j, e_k)|.
double metric_residual(const Connection& nabla, const Mat& g);

/// blocks[i * dim + j].col(k) = R(e_i, e_j) e_k.
struct CurvatureField {
    int dim = 0;
    std::vector<Mat> blocks;

    [[nodiscard]] const Mat& operator()(int i, int j) const { return blocks[static_cast<std::size_t>(i * dim + j)]; }
    [[nodiscard]] Vec operator()(int i, int j, int k) const { return (*this)(i, j).col(k); }
    /// R(e_i, e_j) V for constant-component V.
    [[nodiscard]] Vec apply(int i, int j, const Vec& v) const { return (*this)(i, j) * v; }
};

/// Requires nabla.derivatives unless the brackets are position independent.
CurvatureField riemann(const PointContext& ctx, const Connection& nabla);

double curvature_antisymmetry_residual(const CurvatureField& r);
/// max |g(R(e_i,e_j)e_k, e_l) - g(R(e_k,e_l)e_i, e_j)|.
double curvature_pair_symmetry_residual(const CurvatureField& r, const Mat& g);

/// max_i |nabla_{e_i} xi + phi h e_i + phi e_i|.
double check_nabla_xi(const Connection& nabla, const ContactMetricStructure& s, const EndoField& h);

struct KappaMuReport {
    double kappa = 0.0;
    std::optional<double> mu;  // absent on the Sasakian branch
    double lambda = 0.0;
    double residual = 0.0;
    bool sasakian = false;
    bool k_contact = false;
    double spread = 0.0;  // max deviation of per-context (kappa, mu) from the first context
};

/// Curvature data of one context.
struct PointCurvature {
    Connection levi_civita;
    CurvatureField riemann;
    EndoField h;
};
PointCurvature point_curvature(const PointContext& ctx, const ContactMetricStructure& s);

/// Solves for (kappa, mu) from the h-eigenvectors and reports the full
/// nullity residual without gating.
KappaMuReport fit_kappa_mu(std::span<const CurvatureField> r, std::span<const EndoField> h,
                           const ContactMetricStructure& s, double tol = kDefaultTolerance);

/// fit_kappa_mu gated on the residual: throws NotNullity when it exceeds tol
/// and NonConstantAcrossPoints when the per-context constants disagree.
KappaMuReport extract_kappa_mu(std::span<const CurvatureField> r, std::span<const EndoField> h,
                               const ContactMetricStructure& s, double tol = kDefaultTolerance);

/// Convenience: full pipeline over the model's contexts.
KappaMuReport extract_kappa_mu(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                               double tol = kDefaultTolerance);

/// max residual of the (nabla_X phi)Y and (nabla_X h)Y formulas of a
/// (kappa, mu)-space over all frame pairs.
double check_kmu_covariant_formulas(const PointContext& ctx, const Connection& nabla, const ContactMetricStructure& s,
                                    double kappa, double mu);

/// max |(nabla_V phi) W - g(V, W) xi + eta(W) V|.
double sasakian_residual(const Connection& nabla, const ContactMetricStructure& s);
bool sasakian_check(const Connection& nabla, const ContactMetricStructure& s, double tol = kDefaultTolerance);

/// max |R(V, W) xi - eta(W) V + eta(V) W|.
double sasakian_curvature_residual(const CurvatureField& r, const ContactMetricStructure& s);

}  // namespace kmu
