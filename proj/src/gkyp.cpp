#include "fdsc/gkyp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdsc/error.hpp"

namespace fdsc {

using sdp::Definiteness;
using sdp::LmiBlock;
using sdp::LmiProblem;
using sdp::Structure;

namespace {

// sign * [Mt; Mb]^* (W (x) X) [Mt; Mb] as terms on X.
void add_kron(LmiBlock& blk, const CMatrix& Mt, const CMatrix& Mb, const Eigen::Matrix2cd& W, const std::string& var,
              double sign) {
    if (W(0, 0) != 0.0) blk.terms.push_back({var, Mt.adjoint(), Mt, 0.5 * sign * W(0, 0).real()});
    if (W(1, 1) != 0.0) blk.terms.push_back({var, Mb.adjoint(), Mb, 0.5 * sign * W(1, 1).real()});
    if (W(0, 1) != 0.0) blk.terms.push_back({var, (sign * W(0, 1)) * Mt.adjoint(), Mb, 1.0});
    if (W(0, 1).imag() != 0.0) blk.complex_field = true;
}

// [C D]^T [C D] plus the -mu I part on the disturbance channels, either as
// data (fixed gamma) or as terms on the mu variable.
void add_performance(LmiBlock& blk, const LtiSystem& sys, const std::string& mu, std::optional<double> gamma) {
    const auto n = sys.states();
    const auto nd = sys.inputs();
    Matrix CD(sys.outputs(), n + nd);
    CD << sys.C, sys.D;
    blk.constant += (CD.transpose() * CD).cast<Complex>();
    if (gamma) {
        blk.constant.bottomRightCorner(nd, nd) -= Complex(*gamma * *gamma) * CMatrix::Identity(nd, nd);
        return;
    }
    for (int i = 0; i < nd; ++i) {
        CMatrix e = CMatrix::Zero(n + nd, 1);
        e(n + i, 0) = 1.0;
        blk.terms.push_back({mu, e, e.adjoint(), -0.5});
    }
}

Eigen::Matrix2cd phi_c() { return phi_matrix().cast<Complex>(); }

// Psi enters the LMIs divided by its largest entry so the Q variable stays
// O(1) for extreme cutoffs; Q = Q_lmi / psi_scale.
double psi_scale(const FrequencyBand& band) { return psi_matrix(band).cwiseAbs().maxCoeff(); }

Eigen::Matrix2cd normalized_psi(const FrequencyBand& band) { return psi_matrix(band) / psi_scale(band); }

void require_system(const LtiSystem& sys) {
    sys.validate();
}

Matrix real_part(const CMatrix& X) { return X.real(); }

}  // namespace

LmiProblem assemble_gkyp_lmi(const LtiSystem& sys, const FrequencyBand& band) {
    require_system(sys);
    const int n = sys.states();
    const int nd = sys.inputs();
    LmiProblem prob;
    prob.add_variable("P", n);
    prob.add_variable("Q", n, Structure::symmetric, Definiteness::positive_definite);
    prob.add_variable("mu", 1, Structure::symmetric, Definiteness::positive_definite);

    CMatrix Mt(n, n + nd), Mb = CMatrix::Zero(n, n + nd);
    Mt << sys.A.cast<Complex>(), sys.B.cast<Complex>();
    Mb.leftCols(n) = CMatrix::Identity(n, n);

    LmiBlock blk;
    blk.label = "gkyp[" + describe(band) + "]";
    blk.constant = CMatrix::Zero(n + nd, n + nd);
    add_kron(blk, Mt, Mb, phi_c(), "P", 1.0);
    add_kron(blk, Mt, Mb, normalized_psi(band), "Q", 1.0);
    add_performance(blk, sys, "mu", std::nullopt);
    prob.blocks.push_back(std::move(blk));
    prob.objective = std::vector<sdp::ObjectiveTerm>{{"mu", CMatrix::Ones(1, 1)}};
    return prob;
}

GainBound finite_frequency_gain(const LtiSystem& sys, const FrequencyBand& band, double tolerance,
                                const GainOptions& options) {
    GainBound out;
    out.band = band;
    auto prob = assemble_gkyp_lmi(sys, band);
    out.grid_peak = band_peak_gain(sys, band, options.points_per_decade, options.grid);
    // The variable box must not cut off bounds below the cap.
    auto solver = options.solver;
    solver.box = std::max(solver.box, 10.0 * options.mu_cap);
    auto rep = sdp::minimize_objective(prob, tolerance, solver);
    out.status = rep.status;
    out.iterations = rep.iterations;
    out.message = rep.message;
    if (rep.status != sdp::Status::feasible) {
        out.message = "no finite gain bound: " + sdp::to_string(rep.status) + (rep.message.empty() ? "" : "; " + rep.message);
        return out;
    }
    const double mu = rep.assignment.at("mu")(0, 0).real();
    out.P = real_part(rep.assignment.at("P"));
    out.Q = real_part(rep.assignment.at("Q")) / psi_scale(band);
    if (!(mu <= options.mu_cap)) {
        out.message = "gain bound exceeds the cap";
        return out;
    }
    out.bounded = true;
    out.gamma = std::sqrt(mu);
    return out;
}

LmiProblem assemble_switching_lmi(const std::vector<LtiSystem>& subsystems, const std::vector<FrequencyBand>& bands,
                             const std::optional<std::vector<Matrix>>& fixed_q, const std::map<int, double>& gamma_fixed) {
    const int count = static_cast<int>(subsystems.size());
    if (count < 2) throw InvalidArgument("switching conditions need at least two subsystems", "subsystems");
    if (static_cast<int>(bands.size()) != count) {
        throw DimensionError("subsystem and band counts differ", "bands");
    }
    for (const auto& s : subsystems) require_system(s);
    const int n = subsystems[0].states();
    const int nd = subsystems[0].inputs();
    for (const auto& s : subsystems) {
        if (s.states() != n || s.inputs() != nd || s.outputs() != subsystems[0].outputs()) {
            throw DimensionError("subsystems have different dimensions", "subsystems");
        }
    }
    if (fixed_q && static_cast<int>(fixed_q->size()) != count) throw DimensionError("fixed Q count mismatch", "Q");
    for (const auto& [idx, g] : gamma_fixed) {
        if (idx < 0 || idx >= count) throw InvalidArgument("gamma_fixed index out of range", "gamma_fixed");
        if (!(g > 0.0)) throw InvalidArgument("fixed gamma must be positive", "gamma_fixed");
    }

    auto name = [](const char* base, int i) { return std::string(base) + std::to_string(i + 1); };
    LmiProblem prob;
    if (!fixed_q) {
        for (int i = 0; i < count; ++i) prob.add_variable(name("Q", i), n, Structure::symmetric, Definiteness::positive_definite);
    } else {
        for (const auto& Q : *fixed_q) {
            if (Q.rows() != n || Q.cols() != n) throw DimensionError("fixed Q has wrong shape", "Q");
        }
    }
    for (int i = 0; i < count; ++i) prob.add_variable(name("P", i), n);
    for (int i = 0; i < count; ++i) prob.add_variable(name("Ps", i), n, Structure::symmetric, Definiteness::positive_definite);
    for (int i = 0; i < count; ++i) {
        if (!gamma_fixed.count(i)) prob.add_variable(name("mu", i), 1, Structure::symmetric, Definiteness::positive_definite);
    }

    // Psi_i (x) Q_i - Psi_j (x) Q_j, either as terms or folded into data.
    auto add_band_terms = [&](LmiBlock& blk, const CMatrix& Mt, const CMatrix& Mb, int i, int j) {
        const Eigen::Matrix2cd psi_i = psi_matrix(bands[static_cast<std::size_t>(i)]);
        const Eigen::Matrix2cd psi_j = psi_matrix(bands[static_cast<std::size_t>(j)]);
        if (!fixed_q) {
            add_kron(blk, Mt, Mb, normalized_psi(bands[static_cast<std::size_t>(i)]), name("Q", i), 1.0);
            add_kron(blk, Mt, Mb, normalized_psi(bands[static_cast<std::size_t>(j)]), name("Q", j), -1.0);
            return;
        }
        const CMatrix Qi = (*fixed_q)[static_cast<std::size_t>(i)].cast<Complex>();
        const CMatrix Qj = (*fixed_q)[static_cast<std::size_t>(j)].cast<Complex>();
        const auto rows = Mt.rows();
        CMatrix M(2 * rows, Mt.cols());
        M << Mt, Mb;
        CMatrix W(2 * rows, 2 * rows);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                W.block(r * rows, c * rows, rows, rows) = psi_i(r, c) * Qi - psi_j(r, c) * Qj;
        blk.constant += M.adjoint() * W * M;
        if (psi_i(0, 1).imag() != 0.0 || psi_j(0, 1).imag() != 0.0) blk.complex_field = true;
    };

    for (int i = 0; i < count; ++i) {
        const auto& s = subsystems[static_cast<std::size_t>(i)];
        for (int j = 0; j < count; ++j) {
            if (i == j) continue;
            const std::string pair = "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";

            LmiBlock stab;
            stab.label = "stab" + pair;
            stab.constant = CMatrix::Zero(n, n);
            const CMatrix A = s.A.cast<Complex>();
            const CMatrix I = CMatrix::Identity(n, n);
            add_kron(stab, A, I, phi_c(), name("Ps", i), 1.0);
            add_band_terms(stab, A, I, i, j);
            prob.blocks.push_back(std::move(stab));

            LmiBlock perf;
            perf.label = "perf" + pair;
            perf.constant = CMatrix::Zero(n + nd, n + nd);
            CMatrix Mt(n, n + nd), Mb = CMatrix::Zero(n, n + nd);
            Mt << s.A.cast<Complex>(), s.B.cast<Complex>();
            Mb.leftCols(n) = I;
            add_kron(perf, Mt, Mb, phi_c(), name("P", i), 1.0);
            add_band_terms(perf, Mt, Mb, i, j);
            std::optional<double> g;
            if (auto it = gamma_fixed.find(i); it != gamma_fixed.end()) g = it->second;
            add_performance(perf, s, name("mu", i), g);
            prob.blocks.push_back(std::move(perf));
        }
    }
    return prob;
}

void check_disjoint(const std::vector<FrequencyBand>& bands) {
    for (std::size_t a = 0; a < bands.size(); ++a) {
        for (std::size_t b = a + 1; b < bands.size(); ++b) {
            const double lo = std::max(bands[a].lower_edge(), bands[b].lower_edge());
            const double hi = std::min(bands[a].upper_edge(), bands[b].upper_edge());
            if (lo < hi) {
                throw InvalidArgument("bands " + describe(bands[a]) + " and " + describe(bands[b]) + " overlap", "bands");
            }
        }
    }
}

SwitchingDesign synthesize_q(const StateSpacePlant& plant, const std::vector<Matrix>& gains,
                             const std::vector<FrequencyBand>& bands, int in_band_index, double gamma_tol,
                             double tolerance, const SynthesisOptions& options) {
    plant.validate();
    const int count = static_cast<int>(gains.size());
    if (count < 2) throw InvalidArgument("synthesis needs at least two controllers", "gains");
    if (static_cast<int>(bands.size()) != count) throw DimensionError("gain and band counts differ", "bands");
    if (in_band_index < 0 || in_band_index >= count) throw InvalidArgument("in-band index out of range", "in_band_index");
    if (!(gamma_tol > 0.0)) throw InvalidArgument("gamma_tol must be positive", "gamma_tol");
    check_disjoint(bands);

    std::vector<LtiSystem> subs;
    for (int i = 0; i < count; ++i) {
        subs.push_back(close_loop(plant, gains[static_cast<std::size_t>(i)]));
        if (!is_hurwitz(subs.back().A)) {
            throw InvalidArgument("closed loop with controller " + std::to_string(i + 1) + " is not Hurwitz", "gains");
        }
    }

    std::map<int, double> pinned;
    if (!options.weighted_sum) {
        for (int j = 0; j < count; ++j) {
            if (j != in_band_index) pinned[j] = gamma_tol;
        }
    }
    auto prob = assemble_switching_lmi(subs, bands, std::nullopt, pinned);
    std::vector<sdp::ObjectiveTerm> obj;
    if (options.weighted_sum) {
        if (!options.weights.empty() && static_cast<int>(options.weights.size()) != count) {
            throw DimensionError("weight count mismatch", "weights");
        }
        for (int i = 0; i < count; ++i) {
            const double w = options.weights.empty() ? 1.0 : options.weights[static_cast<std::size_t>(i)];
            obj.push_back({"mu" + std::to_string(i + 1), CMatrix::Constant(1, 1, w)});
        }
    } else {
        obj.push_back({"mu" + std::to_string(in_band_index + 1), CMatrix::Ones(1, 1)});
    }
    prob.objective = obj;

    SwitchingDesign design;
    design.gains = gains;
    design.bands = bands;
    design.gamma_tol = gamma_tol;
    design.in_band_index = in_band_index;
    design.report = sdp::minimize_objective(prob, tolerance, options.solver);
    const auto& rep = design.report;
    if (rep.status != sdp::Status::feasible) {
        std::ostringstream os;
        os << "switching conditions " << sdp::to_string(rep.status) << "; most violated block " << rep.worst_block
           << " (eigenvalue " << rep.worst_block_eig << ")";
        design.message = os.str();
        return design;
    }
    for (int i = 0; i < count; ++i) {
        const std::string k = std::to_string(i + 1);
        design.Q.push_back(real_part(rep.assignment.at("Q" + k)) / psi_scale(bands[static_cast<std::size_t>(i)]));
        design.P.push_back(real_part(rep.assignment.at("P" + k)));
        design.Ps.push_back(real_part(rep.assignment.at("Ps" + k)));
        auto it = rep.assignment.find("mu" + k);
        design.gammas.push_back(it != rep.assignment.end() ? std::sqrt(it->second(0, 0).real()) : gamma_tol);
    }
    design.certificate = sdp::check_solution(prob, rep.assignment, sdp::strictness_margin(prob));
    design.feasible = design.certificate.pass;
    if (!design.feasible) {
        design.message = "solver point failed independent certification at " + design.certificate.worst_label;
    }
    return design;
}

std::vector<GapPoint> gap_function(const StateSpacePlant& plant, const Matrix& k_in, const Matrix& k_out,
                                   const std::vector<double>& grid) {
    const auto a = sigma_max_sweep(close_loop(plant, k_in), grid);
    const auto b = sigma_max_sweep(close_loop(plant, k_out), grid);
    std::vector<GapPoint> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = {grid[k], a[k].sigma - b[k].sigma};
    return out;
}

std::vector<GapPoint> gap_function_serial(const StateSpacePlant& plant, const Matrix& k_in, const Matrix& k_out,
                                          const std::vector<double>& grid) {
    const auto a = sigma_max_sweep_serial(close_loop(plant, k_in), grid);
    const auto b = sigma_max_sweep_serial(close_loop(plant, k_out), grid);
    std::vector<GapPoint> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = {grid[k], a[k].sigma - b[k].sigma};
    return out;
}

}  // namespace fdsc
