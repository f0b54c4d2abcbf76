#pragma once

// Legendrian distributions, Pang's invariant and the closed-form invariants of
// (kappa, mu)-spaces built from it.

#include "kmu/contact.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kmu {

/// n vectors (columns, frame components) spanning a distribution. The
/// coefficients are constant in the frame.
struct DistributionBasis {
    Mat vectors;
    std::string label = "user";

    [[nodiscard]] int size() const { return static_cast<int>(vectors.cols()); }
    [[nodiscard]] Vec operator[](int a) const { return vectors.col(a); }
};

struct Eigendistributions {
    double lambda = 0.0;
    DistributionBasis L;  // +lambda eigenspace of h
    DistributionBasis Q;  // phi L = -lambda eigenspace
};

/// Throws NoSplitting when lambda < tol, SpectrumNotPaired when the spectrum
/// of h on D is not {+lambda (n times), -lambda (n times)}, and
/// NonConstantAcrossPoints when the basis from the first context is not an
/// eigenbasis at another.
Eigendistributions eigendistributions(std::span<const EndoField> hs, const ContactMetricStructure& s,
                                      double tol = kDefaultTolerance);
Eigendistributions eigendistributions(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                                      double tol = kDefaultTolerance);

/// dim = n, B inside D, d eta vanishes on B at every context.
bool legendrian_check(const DistributionBasis& b, std::span<const TwoForm> deta, const ContactMetricStructure& s,
                      double tol = kDefaultTolerance);

/// Max out-of-span component of brackets of basis fields.
double integrability_residual(std::span<const PointContext> contexts, const DistributionBasis& b);
bool integrability_check(std::span<const PointContext> contexts, const DistributionBasis& b,
                         double tol = kDefaultTolerance);

/// phi B. Throws NotComplementary if B, phi B and xi do not span TM.
DistributionBasis conjugate_distribution(const DistributionBasis& b, const ContactMetricStructure& s,
                                         double tol = kDefaultTolerance);

/// Pang's form on a basis, one matrix per context.
struct PangForm {
    std::vector<Mat> matrices;
    double formula_residual = 0.0;  // definition route vs metric route
};

/// Pi(X, X') = -eta([X', [X, xi]]) checked against 2 g([xi, X], phi X').
/// Throws FormulaMismatch when the routes differ by more than tol.
PangForm pang_invariant(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                        const DistributionBasis& b, double tol = kDefaultTolerance);

/// -eta([X', [X, xi]]) alone.
Mat pang_by_definition(const PointContext& ctx, const ContactMetricStructure& s, const DistributionBasis& b);
/// 2 g([xi, X], phi X') alone.
Mat pang_by_metric(const PointContext& ctx, const ContactMetricStructure& s, const DistributionBasis& b);

enum class FoliationType { Flat, Degenerate, NonDegenerate };
std::string_view to_string(FoliationType t);

struct FoliationClass {
    FoliationType type = FoliationType::Degenerate;
    std::vector<FoliationType> per_context;
    std::vector<int> ranks;
    bool consistent_across_contexts = true;
    /// Bracket criterion: [xi, X] tangent to the leaves for every X (flat),
    /// never tangent (non-degenerate).
    int bracket_rank = -1;
    bool bracket_criterion_agrees = true;
    std::string diagnostics;
};

/// Eigenvalue-threshold classification; contexts that disagree give Degenerate.
FoliationClass classify(const PangForm& pi, double tol = kDefaultTolerance);
/// classify() plus the bracket cross-check.
FoliationClass classify(const PangForm& pi, std::span<const PointContext> contexts, const ContactMetricStructure& s,
                        const DistributionBasis& b, double tol = kDefaultTolerance);

/// Coefficients of Pi on D_lambda and D_-lambda as multiples of g:
/// ((lambda+1)^2 - kappa - mu lambda)/lambda and (-(lambda-1)^2 + kappa - mu lambda)/lambda.
/// Throws SasakianLimit when kappa >= 1 - tol.
std::pair<double, double> closed_form_invariants(double kappa, double mu, double tol = kDefaultTolerance);

struct Lemma0Result {
    double residual = 0.0;   // Pi_L(X,X') - Pi_Q(phiX, phiX') - 4 g(hX, X')
    bool corollary1 = true;  // h = 0 implies both foliations share a class
    bool corollary2 = true;  // both flat implies h = 0
};

Lemma0Result lemma0_check(std::span<const PointContext> contexts, const ContactMetricStructure& s,
                          const DistributionBasis& l, double tol = kDefaultTolerance);

struct BoeckxResult {
    double ratio = 0.0;
    double ratio_spread = 0.0;
    double boeckx_im = 0.0;
};

/// Ratio (Pi_L(X,X') + Pi_Q(phiX,phiX')) / (Pi_L(X,X') - Pi_Q(phiX,phiX')) over
/// basis pairs with g(X, X') != 0 and I_M = (1 - mu/2)/sqrt(1 - kappa).
/// Throws ZeroDenominator.
BoeckxResult boeckx_invariant(const PangForm& pi_l, const PangForm& pi_q_conjugate, const ContactMetricStructure& s,
                              const DistributionBasis& l, double kappa, double mu, double tol = kDefaultTolerance);

struct MuRecovery {
    double mu_recovered = 0.0;     // 2 lambda + 2 - Pi_L(X,X)/g(X,X)
    double paper_eq13_value = 0.0; // Pi_L(X,X)/(lambda g(X,X)), as printed
    double spread = 0.0;
};

MuRecovery recover_mu(const PangForm& pi_l, double lambda, const ContactMetricStructure& s,
                      const DistributionBasis& l);

struct FlatnessConditions {
    double f_lambda_value = 0.0;  // kappa + mu lambda - (lambda + 1)^2
    double f_minus_value = 0.0;   // kappa - mu lambda - (lambda - 1)^2
    bool f_lambda_flat = false;
    bool f_minus_flat = false;
};

FlatnessConditions flatness_conditions(double kappa, double mu, double tol = kDefaultTolerance);

/// max entrywise change of Pi on L and on phi L after deform(s, a).
double pi_deformation_invariance(std::span<const PointContext> contexts, const ContactMetricStructure& s, double a,
                                 const DistributionBasis& l, double tol = kDefaultTolerance);

/// Coefficients of Pi as multiples of g, read off a basis vector.
struct InvariantReport {
    double pi_lambda_coeff = 0.0;
    double pi_minus_lambda_coeff = 0.0;
    double ratio = 0.0;
    double boeckx_im = 0.0;
    double mu_recovered = 0.0;
    double paper_eq13_value = 0.0;
};

}  // namespace kmu
