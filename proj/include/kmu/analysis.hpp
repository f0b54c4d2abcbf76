#pragma once

// Full analysis pipeline over a model and the versioned report it produces.

#include "kmu/bileg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kmu {

inline constexpr int kReportVersion = 1;

struct AnalysisOptions {
    double tolerance = kDefaultTolerance;
    std::uint64_t seed = kDefaultSeed;
    std::vector<double> deformations;  // D-homothetic constants to test
};

/// One entry of the pass/fail list. residual is a finite non-negative
/// number (0 when the check is boolean).
struct Check {
    std::string name;
    VerdictState state = VerdictState::NotApplicable;
    double residual = 0.0;
    std::string reason;
    bool operator==(const Check&) const = default;
};

using Matrix = std::vector<std::vector<double>>;

struct ModelIdentity {
    std::string name;
    int dim = 0;
    std::string backend;
    int contexts = 0;
    std::vector<std::string> frame_names;
    bool operator==(const ModelIdentity&) const = default;
};

struct ContactSection {
    std::vector<std::string> structure_violations;
    bool contact = false;
    double deta_phi_residual = 0.0;
    double min_abs_det = 0.0;
    double h_norm = 0.0;
    std::vector<std::string> h_identity_failures;
    bool k_contact = false;
    bool operator==(const ContactSection&) const = default;
};

struct CurvatureSection {
    double torsion_free_residual = 0.0;
    double metric_residual = 0.0;
    double antisymmetry_residual = 0.0;
    double pair_symmetry_residual = 0.0;
    double nabla_xi_residual = 0.0;
    bool sasakian = false;
    double sasakian_residual = 0.0;
    double kappa = 0.0;
    std::optional<double> mu;  // absent on the Sasakian branch
    double lambda = 0.0;
    double nullity_residual = 0.0;
    double spread = 0.0;
    bool nullity = false;
    std::optional<double> covariant_formula_residual;
    bool operator==(const CurvatureSection&) const = default;
};

struct FoliationSection {
    std::string source;  // "eigenspaces" or "declared"
    double lambda = 0.0;
    bool legendrian_l = false;
    bool legendrian_q = false;
    double integrability_l = 0.0;
    double integrability_q = 0.0;
    Matrix pi_l;  // first context
    Matrix pi_q;
    double pang_formula_residual = 0.0;
    std::string class_l;
    std::string class_q;
    bool bracket_criterion_agrees = false;
    std::optional<double> pi_l_coeff;        // Pi_L / g read off the first basis vector
    std::optional<double> pi_q_coeff;
    std::optional<double> closed_form_l;     // ((lambda+1)^2 - kappa - mu lambda)/lambda
    std::optional<double> closed_form_q;     // (-(lambda-1)^2 + kappa - mu lambda)/lambda
    std::optional<double> f_lambda;          // kappa + mu lambda - (lambda+1)^2
    std::optional<double> f_minus_lambda;    // kappa - mu lambda - (lambda-1)^2
    double lemma_residual = 0.0;             // Pi_L(X,X') - Pi_Q(phiX,phiX') - 4 g(hX,X')
    bool same_class_when_h_zero = true;
    bool h_zero_when_both_flat = true;
    std::optional<double> ratio;
    std::optional<double> boeckx_im;
    std::optional<double> mu_recovered;
    std::optional<double> paper_eq13_value;
    bool operator==(const FoliationSection&) const = default;
};

struct BilegSection {
    std::map<std::string, double> axioms;
    std::map<std::string, double> parallel;  // phi, h, g, eta, deta
    std::optional<double> levi_civita_relation;
    bool nabla_g = false;
    bool nabla_phi = false;
    bool explicit_formulas = false;
    bool totally_geodesic = false;
    bool equivalence_consistent = false;
    VerdictState theorem = VerdictState::NotApplicable;
    std::string theorem_reason;
    std::map<std::string, double> theorem_conditions;
    std::map<std::string, double> tanaka_webster;
    bool operator==(const BilegSection&) const = default;
};

struct DeformationEntry {
    double a = 1.0;
    std::optional<double> kappa;
    std::optional<double> mu;
    std::optional<double> expected_kappa;  // (kappa + a^2 - 1)/a^2
    std::optional<double> expected_mu;     // (mu + 2a - 2)/a
    double pi_residual = 0.0;
    double connection_residual = 0.0;
    std::optional<double> boeckx_im;
    bool operator==(const DeformationEntry&) const = default;
};

struct AnalysisReport {
    int report_version = kReportVersion;
    ModelIdentity model;
    double tolerance = kDefaultTolerance;
    std::uint64_t seed = kDefaultSeed;
    ContactSection contact;
    CurvatureSection curvature;
    std::optional<FoliationSection> foliation;
    std::optional<BilegSection> bileg;
    std::vector<DeformationEntry> deformations;
    std::vector<Check> checks;
    std::map<std::string, double> timings_ms;

    bool operator==(const AnalysisReport&) const = default;
    [[nodiscard]] bool failed() const;
};

/// Runs validate, contact, h, curvature, extraction, foliations,
/// bi-Legendrian, Tanaka-Webster and deformation stages. Errors that make the
/// model unusable (invalid metric, inconsistent frame) propagate as Error.
AnalysisReport analyze(const ManifoldModel& model, const AnalysisOptions& options = {});

/// 0 when no check failed, 1 otherwise.
int exit_code(const AnalysisReport& report);

std::string report_to_json(const AnalysisReport& report, int indent = 2);
/// Throws SchemaError on malformed input.
AnalysisReport report_from_json(std::string_view text);
std::string report_to_text(const AnalysisReport& report);

}  // namespace kmu
