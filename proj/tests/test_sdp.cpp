#include "doctest.h"

#include <cmath>
#include <random>

#include "fdsc/error.hpp"
#include "fdsc/sdp.hpp"
#include "support/aircraft.hpp"
#include "support/lmi_cases.hpp"

using namespace fdsc;
using namespace fdsc::sdp;

TEST_CASE("scalar Lyapunov feasibility") {
    auto stable = lmi_cases::scalar_lyapunov(-1.0);
    auto r = solve_feasibility(stable);
    CHECK(r.status == Status::feasible);
    CHECK(r.assignment.at("p")(0, 0).real() > 0.0);
    CHECK(r.worst_block_eig <= -r.margin);
    CHECK(check_solution(stable, r.assignment, 1e-8).pass);

    auto unstable = lmi_cases::scalar_lyapunov(1.0);
    auto u = solve_feasibility(unstable);
    CHECK(u.status == Status::infeasible_or_unbounded);
    CHECK(u.slack >= 0.0);
    CHECK_FALSE(u.message.empty());
}

TEST_CASE("aircraft Lyapunov LMI") {
    const auto A = testdata::aircraft().A;
    // Trace / determinant oracle: a real 2x2 matrix is Hurwitz iff tr < 0, det > 0.
    REQUIRE(A.trace() < 0.0);
    REQUIRE(A.determinant() > 0.0);
    auto prob = lmi_cases::lyapunov(A);
    auto r = solve_feasibility(prob);
    REQUIRE(r.status == Status::feasible);
    auto chk = check_solution(prob, r.assignment, 1e-8);
    CHECK(chk.pass);
    CHECK(chk.worst <= -r.margin * (1.0 - 1e-9));

    Eigen::MatrixXd unstable = A;
    unstable(0, 0) = 3.0;
    unstable(1, 1) = 2.0;
    CHECK(solve_feasibility(lmi_cases::lyapunov(unstable)).status == Status::infeasible_or_unbounded);
}

TEST_CASE("largest eigenvalue as an SDP") {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
    M(0, 0) = 1.0;
    M(1, 1) = 3.0;
    auto prob = lmi_cases::max_eigenvalue(M);
    auto r = minimize_objective(prob, 1e-6);
    REQUIRE(r.status == Status::feasible);
    CHECK(std::abs(r.objective_value - 3.0) <= 1e-6 * 3.0 + 2.0 * r.margin);

    // Rotated, non-diagonal instance.
    Eigen::MatrixXd S(3, 3);
    S << 2.0, -1.0, 0.5, -1.0, 1.0, 0.25, 0.5, 0.25, -0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    auto r2 = minimize_objective(lmi_cases::max_eigenvalue(S), 1e-6);
    REQUIRE(r2.status == Status::feasible);
    CHECK(std::abs(r2.objective_value - es.eigenvalues().maxCoeff()) <= 1e-5);
}

TEST_CASE("scalar bounded-real lemma gives the squared H-infinity norm") {
    auto prob = lmi_cases::scalar_bounded_real(-1.0, 1.0, 1.0, 0.0);
    auto r = minimize_objective(prob, 1e-6);
    REQUIRE(r.status == Status::feasible);
    CHECK(r.assignment.at("mu")(0, 0).real() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(check_solution(prob, r.assignment, 1e-8).pass);

    // |G|^2 = 4 / (4 + w^2) for G = 2 / (s + 2): peak 1 at dc; with D = 0.5
    // the peak is |1 + 0.5| = 1.5 at dc.
    auto r2 = minimize_objective(lmi_cases::scalar_bounded_real(-2.0, 1.0, 2.0, 0.5), 1e-6);
    REQUIRE(r2.status == Status::feasible);
    CHECK(r2.assignment.at("mu")(0, 0).real() == doctest::Approx(2.25).epsilon(1e-5));
}

TEST_CASE("minimize trace(P) subject to P >= I") {
    for (int n : {1, 2, 4}) {
        auto prob = lmi_cases::trace_above_identity(n);
        auto r = minimize_objective(prob, 1e-6);
        REQUIRE(r.status == Status::feasible);
        CHECK(std::abs(r.objective_value - n) <= 1e-5 * n + 2.0 * n * r.margin);
        Eigen::MatrixXd P = r.assignment.at("P").real();
        CHECK((P - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-4);
    }
}

TEST_CASE("unbounded objective is reported") {
    LmiProblem prob;
    prob.add_variable("x", 1);
    LmiBlock b;
    b.label = "x<1";
    b.constant = CMatrix::Constant(1, 1, -1.0);
    b.terms.push_back({"x", CMatrix::Ones(1, 1), CMatrix::Ones(1, 1), 0.5});
    prob.blocks.push_back(b);
    prob.objective = std::vector<ObjectiveTerm>{{"x", CMatrix::Ones(1, 1)}};
    auto r = minimize_objective(prob, 1e-6);
    CHECK(r.status == Status::infeasible_or_unbounded);
}

TEST_CASE("ill-posed problems") {
    LmiProblem empty;
    empty.add_variable("p", 1, Structure::symmetric, Definiteness::positive_definite);
    CHECK_THROWS_AS(solve_feasibility(empty), InvalidArgument);

    auto prob = lmi_cases::scalar_lyapunov(-1.0);
    prob.blocks[0].terms[0].variable = "q";
    CHECK_THROWS_AS(prob.validate(), InvalidArgument);

    auto dup = lmi_cases::scalar_lyapunov(-1.0);
    dup.add_variable("p", 1);
    CHECK_THROWS_AS(dup.validate(), InvalidArgument);

    auto noobj = lmi_cases::scalar_lyapunov(-1.0);
    CHECK_THROWS_AS(minimize_objective(noobj), InvalidArgument);
}

TEST_CASE("check_solution rejects bad assignments") {
    auto prob = lmi_cases::scalar_lyapunov(-1.0);
    Assignment bad{{"p", CMatrix::Constant(1, 1, -1.0)}};
    auto chk = check_solution(prob, bad, 1e-8);
    CHECK_FALSE(chk.pass);
    CHECK(chk.worst > 0.0);
    CHECK_THROWS_AS(check_solution(prob, Assignment{}, 1e-8), InvalidArgument);
}

TEST_CASE("embed_hermitian") {
    auto real = lmi_cases::lyapunov(testdata::aircraft().A);
    auto same = embed_hermitian(real);
    REQUIRE(same.blocks.size() == real.blocks.size());
    CHECK(same.blocks[0].size() == real.blocks[0].size());
    CHECK(same.variables.size() == real.variables.size());

    LmiProblem one;
    one.add_variable("x", 1);
    LmiBlock b;
    b.label = "c";
    b.constant = CMatrix::Constant(1, 1, 2.0);
    b.sense = Sense::positive_definite;
    b.complex_field = true;
    one.blocks.push_back(b);
    auto e = embed_hermitian(one);
    REQUIRE(e.blocks[0].size() == 2);
    CHECK(e.blocks[0].constant.real().isApprox(2.0 * Eigen::MatrixXd::Identity(2, 2)));

    LmiProblem h;
    h.add_variable("x", 1);
    LmiBlock hb;
    hb.label = "h";
    hb.constant = CMatrix::Zero(2, 2);
    hb.constant(0, 1) = Complex(0.0, 1.0);
    hb.constant(1, 0) = Complex(0.0, -1.0);
    h.blocks.push_back(hb);
    auto he = embed_hermitian(h);
    REQUIRE(he.blocks[0].size() == 4);
    CHECK(he.is_real());
    auto eig = jacobi_eigenvalues(he.blocks[0].constant.real());
    REQUIRE(eig.size() == 4);
    CHECK(eig[0] == doctest::Approx(-1.0));
    CHECK(eig[1] == doctest::Approx(-1.0));
    CHECK(eig[2] == doctest::Approx(1.0));
    CHECK(eig[3] == doctest::Approx(1.0));
}

TEST_CASE("hermitian variable: minimal trace above a complex matrix") {
    // min tr X s.t. X >= H, X > 0, H = [[0, j], [-j, 0]]. The optimum is the
    // positive part of H, trace 1.
    LmiProblem p;
    p.add_variable("X", 2, Structure::hermitian, Definiteness::positive_definite);
    LmiBlock b;
    b.label = "X-H";
    b.constant = CMatrix::Zero(2, 2);
    b.constant(0, 1) = Complex(0.0, -1.0);
    b.constant(1, 0) = Complex(0.0, 1.0);
    b.terms.push_back({"X", CMatrix::Identity(2, 2), CMatrix::Identity(2, 2), 0.5});
    b.sense = Sense::positive_definite;
    p.blocks.push_back(b);
    p.objective = std::vector<ObjectiveTerm>{{"X", CMatrix::Identity(2, 2)}};
    auto r = minimize_objective(p, 1e-6);
    REQUIRE(r.status == Status::feasible);
    CHECK(r.objective_value == doctest::Approx(1.0).epsilon(1e-4));
    const CMatrix X = r.assignment.at("X");
    CHECK((X - X.adjoint()).norm() <= 1e-12);
    CHECK(std::abs(X(0, 1).imag()) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(check_solution(p, r.assignment, 1e-8).pass);
}

TEST_CASE("embedding soundness on random Hermitian problems") {
    // Feasible iff b < -lambda_max(H0): blocks H0 + x I < 0 and b - x < 0.
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        CMatrix H0(2, 2);
        H0(0, 0) = nd(rng);
        H0(1, 1) = nd(rng);
        H0(0, 1) = Complex(nd(rng), nd(rng));
        H0(1, 0) = std::conj(H0(0, 1));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(H0);
        const double threshold = -es.eigenvalues().maxCoeff();
        const double b = threshold + (trial % 2 == 0 ? -0.3 : 0.3) * (1.0 + 0.5 * std::abs(nd(rng)));

        LmiProblem p;
        p.add_variable("x", 1);
        LmiBlock blk;
        blk.label = "H0+xI";
        blk.constant = H0;
        CMatrix e0 = CMatrix::Zero(2, 1), e1 = CMatrix::Zero(2, 1);
        e0(0, 0) = 1.0;
        e1(1, 0) = 1.0;
        blk.terms.push_back({"x", e0, e0.adjoint(), 0.5});
        blk.terms.push_back({"x", e1, e1.adjoint(), 0.5});
        p.blocks.push_back(blk);
        LmiBlock lower;
        lower.label = "b<x";
        lower.constant = CMatrix::Constant(1, 1, b);
        lower.terms.push_back({"x", CMatrix::Ones(1, 1), CMatrix::Ones(1, 1), -0.5});
        p.blocks.push_back(lower);

        const bool oracle = b < threshold;
        auto direct = solve_feasibility(p);
        auto embedded = solve_feasibility(embed_hermitian(p));
        CHECK(direct.status == embedded.status);
        CHECK((direct.status == Status::feasible) == oracle);
        ++checked;
    }
    CHECK(checked == 40);
}

TEST_CASE("scaling a homogeneous problem does not change feasibility") {
    const auto A = testdata::aircraft().A;
    for (double lambda : {1e-3, 0.5, 7.0, 1e3}) {
        auto prob = lmi_cases::lyapunov(A);
        for (auto& b : prob.blocks)
            for (auto& t : b.terms) t.coeff *= lambda;
        CHECK(solve_feasibility(prob).status == Status::feasible);
        Eigen::MatrixXd U = -A;
        auto bad = lmi_cases::lyapunov(U);
        for (auto& b : bad.blocks)
            for (auto& t : b.terms) t.coeff *= lambda;
        CHECK(solve_feasibility(bad).status == Status::infeasible_or_unbounded);
    }
}

TEST_CASE("bisection and direct minimization agree") {
    const double tol = 1e-6;
    std::vector<LmiProblem> cases = {
        lmi_cases::scalar_bounded_real(-1.0, 1.0, 1.0, 0.0),
        lmi_cases::scalar_bounded_real(-3.0, 2.0, 0.5, 0.1),
        lmi_cases::max_eigenvalue((Eigen::MatrixXd(2, 2) << 1.0, 0.3, 0.3, 3.0).finished()),
    };
    for (const auto& prob : cases) {
        auto direct = minimize_objective(prob, tol);
        auto bis = minimize_by_bisection(prob, tol);
        REQUIRE(direct.status == Status::feasible);
        REQUIRE(bis.status == Status::feasible);
        CHECK(std::abs(direct.objective_value - bis.objective_value) <= 2.0 * tol * (1.0 + std::abs(direct.objective_value)));
    }
    CHECK_THROWS_AS(minimize_by_bisection(lmi_cases::trace_above_identity(2)), InvalidArgument);
}

TEST_CASE("solver is deterministic") {
    auto prob = lmi_cases::scalar_bounded_real(-1.0, 1.0, 1.0, 0.0);
    auto a = minimize_objective(prob);
    auto b = minimize_objective(prob);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("jacobi eigenvalues agree with a library solver") {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (int n : {1, 2, 3, 6, 10}) {
        Eigen::MatrixXd S(n, n);
        for (int i = 0; i < n * n; ++i) S(i) = nd(rng);
        S = 0.5 * (S + S.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        auto eig = jacobi_eigenvalues(S);
        for (int i = 0; i < n; ++i) CHECK(eig[static_cast<std::size_t>(i)] == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-10));
    }
}

TEST_CASE("compile scalarization order") {
    LmiProblem p;
    p.add_variable("A", 2);
    p.add_variable("S", 3, Structure::skew_symmetric);
    p.add_variable("m", 1);
    LmiBlock b;
    b.label = "b";
    b.constant = CMatrix::Identity(2, 2);
    p.blocks.push_back(b);
    auto cp = compile(p, 0.0);
    REQUIRE(cp.dimension() == 3 + 3 + 1);
    CHECK(cp.scalars[0].variable == "A");
    CHECK((cp.scalars[1].row == 0 && cp.scalars[1].col == 1));
    CHECK((cp.scalars[2].row == 1 && cp.scalars[2].col == 1));
    CHECK((cp.scalars[3].variable == "S" && cp.scalars[3].row == 0 && cp.scalars[3].col == 1));
    CHECK((cp.scalars[5].row == 1 && cp.scalars[5].col == 2));
    CHECK(cp.scalars[6].variable == "m");

    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(7, 1.0, 7.0);
    auto values = unpack(p, cp, y);
    CHECK(values.at("S")(2, 1).real() == -6.0);
    CHECK(pack(cp, values) == y);
}

TEST_CASE("SDPA export of the scalar Lyapunov problem") {
    auto prob = lmi_cases::scalar_lyapunov(-1.0);
    auto text = export_sdpa(prob);
    std::istringstream in(text);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() >= 5);
    CHECK(lines[0] == "1");
    CHECK(lines[1] == "1");
    CHECK(lines[2] == "-2");
    CHECK(lines[3] == "0");
    auto data = read_sdpa(text);
    CHECK(data.m == 1);
    CHECK(lines.size() == 4 + data.entries.size());
    CHECK(write_sdpa(data) == text);
}

TEST_CASE("SDPA round trip and rejection of complex input") {
    auto prob = lmi_cases::scalar_bounded_real(-1.0, 1.0, 1.0, 0.0);
    auto text = export_sdpa(prob);
    auto data = read_sdpa(text);
    CHECK(write_sdpa(data) == text);
    auto cp = compile(prob, strictness_margin(prob));
    CHECK(data == to_sdpa(cp));
    CHECK(data.c[static_cast<std::size_t>(data.m - 1)] == 1.0);

    LmiProblem h;
    h.add_variable("x", 1);
    LmiBlock hb;
    hb.label = "h";
    hb.constant = CMatrix::Zero(2, 2);
    hb.constant(0, 1) = Complex(0.0, 1.0);
    hb.constant(1, 0) = Complex(0.0, -1.0);
    h.blocks.push_back(hb);
    CHECK_THROWS_AS(export_sdpa(h), InvalidArgument);
    CHECK_NOTHROW(export_sdpa(embed_hermitian(h)));

    CHECK_THROWS_AS(read_sdpa("1\n1\n2\n"), InvalidArgument);
    CHECK_THROWS_AS(read_sdpa("1\n1\n2\n0\n0 1 3 3 1.0\n"), InvalidArgument);
    CHECK_THROWS_AS(read_sdpa("1\n1\n-2\n0\n0 1 1 2 1.0\n"), InvalidArgument);
    auto commented = read_sdpa("\"a comment\n* another\n1\n1\n{2}\n0\n1 1 1 2 0.5\n");
    CHECK(commented.block_sizes == std::vector<int>{2});
}
