#pragma once

// Small LMI problems with known answers.

#include "fdsc/sdp.hpp"

namespace lmi_cases {

using fdsc::CMatrix;
using namespace fdsc::sdp;

// 2 a p < 0, p > 0.
inline LmiProblem scalar_lyapunov(double a) {
    LmiProblem p;
    p.add_variable("p", 1, Structure::symmetric, Definiteness::positive_definite);
    LmiBlock b;
    b.label = "lyapunov";
    b.constant = CMatrix::Zero(1, 1);
    b.terms.push_back({"p", CMatrix::Constant(1, 1, a), CMatrix::Ones(1, 1), 1.0});
    p.blocks.push_back(b);
    return p;
}

// A' P + P A < 0, P > 0.
inline LmiProblem lyapunov(const Eigen::MatrixXd& A) {
    const auto n = A.rows();
    LmiProblem p;
    p.add_variable("P", static_cast<int>(n), Structure::symmetric, Definiteness::positive_definite);
    LmiBlock b;
    b.label = "lyapunov";
    b.constant = CMatrix::Zero(n, n);
    b.terms.push_back({"P", A.transpose().cast<fdsc::Complex>(), CMatrix::Identity(n, n), 1.0});
    p.blocks.push_back(b);
    return p;
}

// min t s.t. t I - M > 0.
inline LmiProblem max_eigenvalue(const Eigen::MatrixXd& M) {
    const auto n = M.rows();
    LmiProblem p;
    p.add_variable("t", 1);
    LmiBlock b;
    b.label = "tI-M";
    b.constant = -M.cast<fdsc::Complex>();
    b.sense = Sense::positive_definite;
    for (Eigen::Index i = 0; i < n; ++i) {
        CMatrix e = CMatrix::Zero(n, 1);
        e(i, 0) = 1.0;
        b.terms.push_back({"t", e, e.adjoint(), 0.5});
    }
    p.blocks.push_back(b);
    p.objective = std::vector<ObjectiveTerm>{{"t", CMatrix::Ones(1, 1)}};
    return p;
}

// Bounded-real lemma for a scalar system, minimizing mu = gamma^2:
// [[2aP + c^2, bP + cd], [bP + cd, d^2 - mu]] < 0.
inline LmiProblem scalar_bounded_real(double a, double b, double c, double d) {
    LmiProblem p;
    p.add_variable("P", 1);
    p.add_variable("mu", 1, Structure::symmetric, Definiteness::positive_definite);
    LmiBlock blk;
    blk.label = "bounded-real";
    blk.constant = CMatrix(2, 2);
    blk.constant << c * c, c * d, c * d, d * d;
    CMatrix L(2, 1), R(1, 2);
    L << a, b;
    R << 1.0, 0.0;
    blk.terms.push_back({"P", L, R, 1.0});
    CMatrix e(2, 1);
    e << 0.0, 1.0;
    blk.terms.push_back({"mu", e, e.adjoint(), -0.5});
    p.blocks.push_back(blk);
    p.objective = std::vector<ObjectiveTerm>{{"mu", CMatrix::Ones(1, 1)}};
    return p;
}

// min tr P s.t. P - I > 0.
inline LmiProblem trace_above_identity(int n) {
    LmiProblem p;
    p.add_variable("P", n);
    LmiBlock b;
    b.label = "P-I";
    b.constant = -CMatrix::Identity(n, n);
    b.sense = Sense::positive_definite;
    b.terms.push_back({"P", CMatrix::Identity(n, n), CMatrix::Identity(n, n), 0.5});
    p.blocks.push_back(b);
    p.objective = std::vector<ObjectiveTerm>{{"P", CMatrix::Identity(n, n)}};
    return p;
}

}  // namespace lmi_cases
