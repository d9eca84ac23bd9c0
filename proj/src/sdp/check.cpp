#include <algorithm>
#include <cmath>

#include "fdsc/error.hpp"
#include "fdsc/sdp.hpp"

namespace fdsc::sdp {

std::vector<double> jacobi_eigenvalues(const Matrix& S, double tol, int max_sweeps) {
    const auto n = S.rows();
    if (S.cols() != n) throw DimensionError("jacobi_eigenvalues needs a square matrix");
    Matrix a = 0.5 * (S + S.transpose());
    const double scale = std::max(1e-300, a.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= tol * scale) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle from the 2x2 subproblem (Golub & Van Loan 8.5.2).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

namespace {

Matrix real_embedding(const CMatrix& H) {
    const auto n = H.rows();
    if (H.imag().cwiseAbs().maxCoeff() == 0.0) return H.real();
    Matrix E(2 * n, 2 * n);
    E << H.real(), -H.imag(), H.imag(), H.real();
    return E;
}

double normalized_extreme(const CMatrix& F, Sense sense) {
    const auto eig = jacobi_eigenvalues(real_embedding(sense == Sense::negative_definite ? F : CMatrix(-F)));
    return eig.back();
}

}  // namespace

CheckReport check_solution(const LmiProblem& problem, const Assignment& values, double tolerance) {
    problem.validate();
    for (const auto& v : problem.variables) {
        auto it = values.find(v.name);
        if (it == values.end()) throw InvalidArgument("assignment is missing variable '" + v.name + "'", v.name);
        if (it->second.rows() != v.dim || it->second.cols() != v.dim) {
            throw DimensionError("value for '" + v.name + "' has wrong shape", v.name);
        }
    }
    CheckReport report;
    auto record = [&](const std::string& label, double e) {
        const bool ok = e <= -tolerance;
        report.blocks.push_back({label, e, ok});
        report.pass = report.pass && ok;
        if (e > report.worst) {
            report.worst = e;
            report.worst_label = label;
        }
    };
    for (const auto& b : problem.blocks) record(b.label, normalized_extreme(assemble_block(b, values), b.sense));
    for (const auto& v : problem.variables) {
        if (v.definiteness != Definiteness::positive_definite) continue;
        const CMatrix& X = values.at(v.name);
        record(v.name + ">0", normalized_extreme(0.5 * (X + X.adjoint()), Sense::positive_definite));
    }
    return report;
}

}  // namespace fdsc::sdp
