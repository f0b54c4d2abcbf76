#pragma once

// Almost contact metric structures: validation, Phi, d(eta), the contact
// condition, h = (1/2) L_xi phi, and D-homothetic deformations.

#include "kmu/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace kmu {

/// Skew frame matrix, entry (i, j) = omega(e_i, e_j).
using TwoForm = Mat;
/// Frame matrix of an endomorphism field, column j = A(e_j).
using EndoField = Mat;

/// Names of the violated almost contact metric identities; empty when valid.
/// Throws MetricNotPositiveDefinite.
std::vector<std::string> validate_acm(const ContactMetricStructure& s, double tol = kDefaultTolerance);

/// Phi(V, W) = g(V, phi W).
TwoForm fundamental_form(const ContactMetricStructure& s);

/// d eta(e_i, e_j) = -1/2 eta([e_i, e_j]) for constant-component eta.
TwoForm d_eta(const PointContext& ctx, const ContactMetricStructure& s);

struct ContactCheck {
    bool contact = false;
    double deta_phi_residual = 0.0;  // max |d eta - Phi|
    double min_abs_det = 0.0;        // |det d eta|_D| in a g-orthonormal D basis, minimum over contexts
    std::vector<std::string> diagnostics;
};

ContactCheck contact_check(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                           double tol = kDefaultTolerance);

/// h e_i = 1/2 ([xi, phi e_i] - phi [xi, e_i]).
EndoField compute_h(const PointContext& ctx, const ContactMetricStructure& s);

/// Frame derivative e_k(h); zero when the brackets are position independent.
EndoField compute_h_derivative(const PointContext& ctx, const ContactMetricStructure& s, int k);

/// g-symmetry, trace-free, h phi + phi h = 0, h xi = 0.
std::vector<std::string> h_identities_check(const ContactMetricStructure& s, const EndoField& h,
                                            double tol = kDefaultTolerance);

/// True iff every entry of every h is below tol (xi Killing).
bool is_k_contact(std::span<const EndoField> hs, double tol = kDefaultTolerance);

/// D-homothetic deformation with constant a > 0. Throws NonPositiveConstant.
ContactMetricStructure deform(const ContactMetricStructure& s, double a);
ManifoldModel deform(const ManifoldModel& model, double a);

/// g-orthonormal basis of D = ker eta, as columns of frame components.
Mat contact_basis(const ContactMetricStructure& s);

/// Spectrum of h restricted to D: ascending eigenvalues with g-orthonormal
/// eigenvectors (frame components).
struct HSpectrum {
    Vec eigenvalues;
    Mat eigenvectors;
};
HSpectrum h_spectrum(const EndoField& h, const ContactMetricStructure& s);

}  // namespace kmu
