#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdsc/model.hpp"

namespace fdsc::sdp {

enum class Structure { symmetric, hermitian, skew_symmetric };
enum class Definiteness { free, positive_definite };
enum class Sense { negative_definite, positive_definite };

struct MatrixVariable {
    std::string name;
    int dim = 1;
    Structure structure = Structure::symmetric;
    Definiteness definiteness = Definiteness::free;
};

// Contributes coeff * (L X R + (L X R)^*) to its block. A congruence L X L^*
// is written with coeff 0.5.
struct LmiTerm {
    std::string variable;
    CMatrix left;
    CMatrix right;
    double coeff = 1.0;
};

struct LmiBlock {
    std::string label;
    CMatrix constant;
    std::vector<LmiTerm> terms;
    Sense sense = Sense::negative_definite;
    // Block lives over the complex field even if all its data happens to be
    // real; embed_hermitian doubles it.
    bool complex_field = false;

    int size() const { return static_cast<int>(constant.rows()); }
};

// Linear objective sum_k Re tr(W_k X_k).
struct ObjectiveTerm {
    std::string variable;
    CMatrix weight;
};

struct LmiProblem {
    std::vector<MatrixVariable> variables;
    std::vector<LmiBlock> blocks;
    std::optional<std::vector<ObjectiveTerm>> objective;

    const MatrixVariable* find(const std::string& name) const;
    MatrixVariable& add_variable(std::string name, int dim, Structure s = Structure::symmetric,
                                 Definiteness d = Definiteness::free);

    // Unique names, known references, conforming factor shapes, Hermitian
    // constants. Throws DimensionError / InvalidArgument.
    void validate() const;

    bool is_real() const;
    double largest_constant_norm() const;
};

using Assignment = std::map<std::string, CMatrix>;

// Real-symmetric / skew / Hermitian value of X at an assignment, computed
// directly from the term list (no compilation).
CMatrix assemble_block(const LmiBlock& block, const Assignment& values);

// Complex problem -> real problem: H -> [[Re H, -Im H], [Im H, Re H]].
// Hermitian variables split into <name>.re (symmetric) and <name>.im
// (skew-symmetric). Purely real input is returned unchanged.
LmiProblem embed_hermitian(const LmiProblem& problem);

// Recombine an embedded assignment (<name>.re / <name>.im) into Hermitian
// values for the original variables.
Assignment collapse_assignment(const LmiProblem& original, const Assignment& embedded);

// 1e-7 * (1 + largest constant-block spectral norm).
double strictness_margin(const LmiProblem& problem);

// Numeric form: every constraint, including variable definiteness, written
// as G0 + sum_k y_k Gk > 0 (real symmetric, strictness margin folded into G0).
struct CompiledProblem {
    struct Block {
        std::string label;
        Matrix g0;
        std::vector<Matrix> gk;  // one per scalar
    };
    struct Scalar {
        std::string variable;
        int row, col;
    };
    std::vector<Scalar> scalars;
    std::vector<Block> blocks;
    Vector cost;  // empty when there is no objective
    double margin = 0.0;

    int dimension() const { return static_cast<int>(scalars.size()); }
};

// Scalarization: variables in declaration order, each by upper triangle in
// row-major order (strict upper triangle for skew-symmetric variables).
CompiledProblem compile(const LmiProblem& real_problem, double margin);

Vector pack(const CompiledProblem& compiled, const Assignment& values);
Assignment unpack(const LmiProblem& real_problem, const CompiledProblem& compiled, const Vector& y);

enum class Status { feasible, infeasible_or_unbounded, max_iterations };
std::string to_string(Status s);

struct SolveReport {
    Status status = Status::max_iterations;
    Assignment assignment;
    double objective_value = 0.0;
    // Largest sense-normalized eigenvalue over all blocks and definite
    // variables: lambda_max(F) for F < 0, lambda_max(-F) for F > 0. A value
    // <= -margin means every constraint holds.
    double worst_block_eig = 0.0;
    std::string worst_block;
    int iterations = 0;
    double slack = 0.0;  // final phase-1 shift
    double margin = 0.0;
    std::string message;
};

struct SolverOptions {
    double objective_tolerance = 1e-6;
    double eigen_tolerance = 1e-8;
    // Box on every scalar decision variable, |y_k| <= box.
    double box = 1e5;
    int max_newton = 400;
    int max_outer = 60;
    double barrier_growth = 8.0;
    // Negative: derive from the problem (strictness_margin).
    double margin_override = -1.0;
    bool allow_bisection = true;
};

SolveReport solve_feasibility(const LmiProblem& problem, double tolerance = 1e-8, const SolverOptions& options = {});
SolveReport minimize_objective(const LmiProblem& problem, double tolerance = 1e-6, const SolverOptions& options = {});

// Objective must be a single 1x1 variable with positive weight. Brackets the
// optimum with feasibility solves.
SolveReport minimize_by_bisection(const LmiProblem& problem, double tolerance = 1e-6, const SolverOptions& options = {});

struct BlockResidual {
    std::string label;
    double extreme_eig;  // sense-normalized, negative means satisfied
    bool satisfied;
};

struct CheckReport {
    std::vector<BlockResidual> blocks;  // constraint blocks then definite variables
    bool pass = true;
    double worst = -std::numeric_limits<double>::infinity();
    std::string worst_label;
};

// Independent certification: assembles each block from the term list and
// computes eigenvalues with a cyclic Jacobi sweep on the real embedding.
// Passes iff every sense-normalized extreme eigenvalue is <= -tolerance.
CheckReport check_solution(const LmiProblem& problem, const Assignment& values, double tolerance);

// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
// ascending. Kept separate from Eigen's solvers on purpose.
std::vector<double> jacobi_eigenvalues(const Matrix& S, double tol = 1e-15, int max_sweeps = 100);

// ---- SDPA sparse format ----------------------------------------------------
//
// Constraint: sum_k y_k F_k - F_0 >= 0, objective min c^T y. Blocks of size 1
// are gathered into one diagonal block (negative size).
struct SdpaData {
    int m = 0;
    std::vector<int> block_sizes;
    std::vector<double> c;
    struct Entry {
        int mat, block, i, j;
        double value;
    };
    std::vector<Entry> entries;

    bool operator==(const SdpaData&) const;
};

SdpaData to_sdpa(const CompiledProblem& compiled);
std::string write_sdpa(const SdpaData& data);
SdpaData read_sdpa(const std::string& text);

// Compiles a real problem and writes it. Throws InvalidArgument on complex
// input (embed first).
std::string export_sdpa(const LmiProblem& problem);

}  // namespace fdsc::sdp
