#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdsc/model.hpp"
#include "fdsc/sdp.hpp"

namespace fdsc {

// Finite-frequency bounded-real LMI for (A, B, C, D) over a band:
//   [A B; I 0]^T (Phi (x) P + Psi (x) Q) [A B; I 0] + [C D; 0 I]^T diag(I, -mu I) [C D; 0 I] < 0
// Variables "P" (symmetric), "Q" (symmetric, > 0), "mu" (= gamma^2, > 0).
// The objective minimizes mu. MF blocks are complex and marked for embedding.
// Psi is scaled by 1 / max|Psi_ij| inside the LMI (Q absorbs the factor);
// GainBound::Q and SwitchingDesign::Q are reported in the unscaled form.
sdp::LmiProblem assemble_gkyp_lmi(const LtiSystem& sys, const FrequencyBand& band);

struct GainOptions {
    int points_per_decade = 100;
    GridOptions grid;
    double mu_cap = 1e6;
    sdp::SolverOptions solver;
};

struct GainBound {
    FrequencyBand band;
    bool bounded = false;
    double gamma = std::numeric_limits<double>::infinity();
    Matrix P, Q;
    double grid_peak = 0.0;
    sdp::Status status = sdp::Status::max_iterations;
    int iterations = 0;
    std::string message;
};

GainBound finite_frequency_gain(const LtiSystem& sys, const FrequencyBand& band, double tolerance = 1e-6,
                                const GainOptions& options = {});

// Switching conditions for every ordered pair (i, j), i != j:
//   stab(i,j): [A_i; I]^T (Phi (x) Ps_i + Psi_i (x) Q_i - Psi_j (x) Q_j) [A_i; I] < 0
//   perf(i,j): [A_i B_i; I 0]^T (Phi (x) P_i + Psi_i (x) Q_i - Psi_j (x) Q_j) [A_i B_i; I 0]
//              + [C_i D_i; 0 I]^T diag(I, -mu_i I) [C_i D_i; 0 I] < 0
// Variables are named Q<i>, P<i>, Ps<i>, mu<i> with 1-based i. With fixed_q the
// Q's become data; indices in gamma_fixed (0-based) have mu_i = gamma^2 folded
// into the constant.
sdp::LmiProblem assemble_switching_lmi(const std::vector<LtiSystem>& subsystems, const std::vector<FrequencyBand>& bands,
                                  const std::optional<std::vector<Matrix>>& fixed_q = std::nullopt,
                                  const std::map<int, double>& gamma_fixed = {});

struct SynthesisOptions {
    // Minimize sum_i w_i mu_i over all mu's (none pinned) instead of the
    // single in-band mu with the others pinned to gamma_tol^2.
    bool weighted_sum = false;
    std::vector<double> weights;
    sdp::SolverOptions solver;
};

struct SwitchingDesign {
    std::vector<Matrix> gains;
    std::vector<FrequencyBand> bands;
    std::vector<Matrix> Q, P, Ps;
    std::vector<double> gammas;
    double gamma_tol = 0.0;
    int in_band_index = 0;
    bool feasible = false;
    sdp::SolveReport report;
    sdp::CheckReport certificate;
    std::string message;
};

// Bands must be pairwise disjoint (touching edges allowed) and every gain
// must give a Hurwitz closed loop; both are checked up front.
SwitchingDesign synthesize_q(const StateSpacePlant& plant, const std::vector<Matrix>& gains,
                             const std::vector<FrequencyBand>& bands, int in_band_index, double gamma_tol,
                             double tolerance = 1e-6, const SynthesisOptions& options = {});

void check_disjoint(const std::vector<FrequencyBand>& bands);

struct GapPoint {
    double omega;
    double gap;
};

// sigma_max(G(jw; K_in)) - sigma_max(G(jw; K_out)).
std::vector<GapPoint> gap_function(const StateSpacePlant& plant, const Matrix& k_in, const Matrix& k_out,
                                   const std::vector<double>& grid);
std::vector<GapPoint> gap_function_serial(const StateSpacePlant& plant, const Matrix& k_in, const Matrix& k_out,
                                          const std::vector<double>& grid);

}  // namespace fdsc
