#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "fdsc/error.hpp"
#include "fdsc/sdp.hpp"

namespace fdsc::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log-det barrier over the compiled blocks, the variable box and, in phase 1,
// a uniform shift s added to every block (G_b(y) + s I > 0).
class Barrier {
public:
    Barrier(const CompiledProblem& cp, double box, bool with_shift, double shift_floor)
        : cp_(cp), box_(box), shift_(with_shift), floor_(shift_floor) {
        nu_ = 2.0 * cp.dimension();
        for (const auto& b : cp.blocks) nu_ += static_cast<double>(b.g0.rows());
        if (shift_) nu_ += 1.0;
    }

    int size() const { return cp_.dimension() + (shift_ ? 1 : 0); }
    double degree() const { return nu_; }

    Matrix block_value(std::size_t b, const Vector& z) const {
        const auto& blk = cp_.blocks[b];
        Matrix G = blk.g0;
        for (int k = 0; k < cp_.dimension(); ++k) {
            if (z(k) != 0.0) G += z(k) * blk.gk[static_cast<std::size_t>(k)];
        }
        if (shift_) G.diagonal().array() += z(cp_.dimension());
        return G;
    }

    bool inside(const Vector& z) const {
        for (int k = 0; k < cp_.dimension(); ++k) {
            if (!(std::abs(z(k)) < box_)) return false;
        }
        if (shift_ && !(z(cp_.dimension()) + floor_ > 0.0)) return false;
        for (std::size_t b = 0; b < cp_.blocks.size(); ++b) {
            Eigen::LLT<Matrix> llt(block_value(b, z));
            if (llt.info() != Eigen::Success) return false;
        }
        return true;
    }

    // Barrier value only; +inf outside the domain.
    double value(const Vector& z) const {
        double f = 0.0;
        const int m = cp_.dimension();
        for (int k = 0; k < m; ++k) {
            const double a = box_ - z(k), b = box_ + z(k);
            if (!(a > 0.0 && b > 0.0)) return kInf;
            f -= std::log(a) + std::log(b);
        }
        if (shift_) {
            const double a = z(m) + floor_;
            if (!(a > 0.0)) return kInf;
            f -= std::log(a);
        }
        for (std::size_t b = 0; b < cp_.blocks.size(); ++b) {
            Eigen::LLT<Matrix> llt(block_value(b, z));
            if (llt.info() != Eigen::Success) return kInf;
            const Vector d = llt.matrixLLT().diagonal();
            if ((d.array() <= 0.0).any()) return kInf;
            f -= 2.0 * d.array().log().sum();
        }
        return f;
    }

    void derivatives(const Vector& z, Vector& g, Matrix& H) const {
        const int m = cp_.dimension();
        const int p = size();
        g = Vector::Zero(p);
        H = Matrix::Zero(p, p);
        for (int k = 0; k < m; ++k) {
            const double a = box_ - z(k), b = box_ + z(k);
            g(k) += 1.0 / a - 1.0 / b;
            H(k, k) += 1.0 / (a * a) + 1.0 / (b * b);
        }
        if (shift_) {
            const double a = z(m) + floor_;
            g(m) -= 1.0 / a;
            H(m, m) += 1.0 / (a * a);
        }
        std::vector<Matrix> W(static_cast<std::size_t>(p));
        for (std::size_t b = 0; b < cp_.blocks.size(); ++b) {
            const auto& blk = cp_.blocks[b];
            Eigen::LLT<Matrix> llt(block_value(b, z));
            const Matrix Ginv = llt.solve(Matrix::Identity(blk.g0.rows(), blk.g0.rows()));
            std::vector<int> active;
            for (int k = 0; k < m; ++k) {
                const auto& Gk = blk.gk[static_cast<std::size_t>(k)];
                if (Gk.cwiseAbs().maxCoeff() == 0.0) continue;
                W[static_cast<std::size_t>(k)] = Ginv * Gk;
                active.push_back(k);
            }
            if (shift_) {
                W[static_cast<std::size_t>(m)] = Ginv;
                active.push_back(m);
            }
            for (std::size_t a = 0; a < active.size(); ++a) {
                const auto& Wa = W[static_cast<std::size_t>(active[a])];
                g(active[a]) -= Wa.trace();
                for (std::size_t c = a; c < active.size(); ++c) {
                    const auto& Wc = W[static_cast<std::size_t>(active[c])];
                    const double h = (Wa.array() * Wc.transpose().array()).sum();
                    H(active[a], active[c]) += h;
                    if (c != a) H(active[c], active[a]) += h;
                }
            }
        }
    }

private:
    const CompiledProblem& cp_;
    double box_;
    bool shift_;
    double floor_;
    double nu_ = 0.0;
};

struct CenterResult {
    int steps = 0;
    bool stalled = false;
};

// Damped Newton on t * c^T z + barrier(z), with a Jacobi-scaled Hessian.
CenterResult center(const Barrier& bar, const Vector& c, double t, Vector& z, int max_steps,
                    const std::function<bool(const Vector&)>& stop_early) {
    CenterResult res;
    Vector g;
    Matrix H;
    const int p = bar.size();
    double fz = t * c.dot(z) + bar.value(z);
    for (; res.steps < max_steps; ++res.steps) {
        bar.derivatives(z, g, H);
        g += t * c;
        Vector dinv = H.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        Matrix Hs = dinv.asDiagonal() * H * dinv.asDiagonal();
        Vector gs = dinv.cwiseProduct(g);
        Eigen::LDLT<Matrix> ldlt(Hs);
        Vector step;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            step = -ldlt.solve(gs);
        } else {
            Hs.diagonal().array() += 1e-10;
            step = -Hs.llt().solve(gs);
        }
        Vector dz = dinv.cwiseProduct(step);
        const double dec2 = -g.dot(dz);
        if (!std::isfinite(dec2)) {
            res.stalled = true;
            break;
        }
        if (dec2 < 1e-10) break;
        double alpha = 1.0;
        // Damped step keeps the Newton iterate well inside the domain.
        if (dec2 > 0.25) alpha = 1.0 / (1.0 + std::sqrt(dec2));
        Vector trial;
        double ft = kInf;
        int halvings = 0;
        for (; halvings < 60; ++halvings) {
            trial = z + alpha * dz;
            ft = t * c.dot(trial) + bar.value(trial);
            if (std::isfinite(ft) && ft <= fz - 0.25 * alpha * dec2 + 1e-13 * std::abs(fz)) break;
            alpha *= 0.5;
        }
        if (halvings == 60) {
            res.stalled = true;
            break;
        }
        z = trial;
        fz = ft;
        if (stop_early && stop_early(z)) {
            ++res.steps;
            break;
        }
    }
    (void)p;
    return res;
}

Vector initial_point(const LmiProblem& problem, const CompiledProblem& cp) {
    Vector y = Vector::Zero(cp.dimension());
    for (int k = 0; k < cp.dimension(); ++k) {
        const auto& s = cp.scalars[static_cast<std::size_t>(k)];
        const auto* v = problem.find(s.variable);
        if (v->definiteness == Definiteness::positive_definite && s.row == s.col) y(k) = 1.0;
    }
    return y;
}

double min_eig(const Matrix& G) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

struct PhaseOne {
    bool feasible = false;
    bool decided = false;
    Vector y;
    double slack = 0.0;
    int iterations = 0;
};

PhaseOne phase_one(const LmiProblem& problem, const CompiledProblem& cp, const SolverOptions& opt) {
    PhaseOne out;
    const int m = cp.dimension();
    Vector y = initial_point(problem, cp);
    y = y.cwiseMax(-0.5 * opt.box).cwiseMin(0.5 * opt.box);
    double worst = kInf;
    double scale = 1.0;
    for (const auto& b : cp.blocks) {
        Matrix G = b.g0;
        for (int k = 0; k < m; ++k) G += y(k) * b.gk[static_cast<std::size_t>(k)];
        worst = std::min(worst, min_eig(G));
        scale = std::max(scale, b.g0.cwiseAbs().maxCoeff());
    }
    if (cp.blocks.empty()) worst = 1.0;
    if (worst > 0.0) {
        out.feasible = out.decided = true;
        out.y = y;
        out.slack = -worst;
        return out;
    }
    const double s0 = -worst + std::max(1.0, 0.1 * std::abs(worst));
    const double floor = s0 + scale;
    Barrier bar(cp, opt.box, true, floor);
    Vector z(m + 1);
    z << y, s0;
    Vector c = Vector::Zero(m + 1);
    c(m) = 1.0;
    double t = bar.degree() / std::max(1.0, s0);
    bool found = false;
    auto stop = [&](const Vector& zz) { return zz(m) < 0.0; };
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        auto r = center(bar, c, t, z, opt.max_newton, found ? std::function<bool(const Vector&)>() : stop);
        out.iterations += r.steps;
        if (z(m) < 0.0) {
            if (!found) {
                // Finish centering at this barrier weight for a better interior point.
                found = true;
                auto r2 = center(bar, c, t, z, opt.max_newton, {});
                out.iterations += r2.steps;
            }
            out.feasible = out.decided = true;
            break;
        }
        const double gap = bar.degree() / t;
        if (z(m) - gap > 0.0) {
            out.decided = true;
            break;
        }
        if (gap < 1e-12 * (1.0 + scale)) {
            out.decided = true;
            break;
        }
        if (r.stalled && outer > 0) break;
        t *= opt.barrier_growth;
    }
    out.y = z.head(m);
    out.slack = z(m);
    return out;
}

struct Evaluation {
    double worst = -kInf;
    std::string label;
};

Evaluation evaluate(const LmiProblem& problem, const Assignment& values) {
    Evaluation e;
    auto take = [&](const std::string& label, const CMatrix& F) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(F, Eigen::EigenvaluesOnly);
        const double v = es.eigenvalues().maxCoeff();
        if (v > e.worst) {
            e.worst = v;
            e.label = label;
        }
    };
    for (const auto& b : problem.blocks) {
        CMatrix F = assemble_block(b, values);
        take(b.label, b.sense == Sense::negative_definite ? F : CMatrix(-F));
    }
    for (const auto& v : problem.variables) {
        if (v.definiteness != Definiteness::positive_definite) continue;
        const CMatrix& X = values.at(v.name);
        take(v.name + ">0", CMatrix(-0.5 * (X + X.adjoint())));
    }
    return e;
}

double objective_of(const LmiProblem& problem, const Assignment& values) {
    if (!problem.objective) return 0.0;
    double f = 0.0;
    for (const auto& o : *problem.objective) f += (o.weight * values.at(o.variable)).trace().real();
    return f;
}

void finish(const LmiProblem& original, const LmiProblem& real, const CompiledProblem& cp, const Vector& y,
            SolveReport& rep) {
    rep.assignment = collapse_assignment(original, unpack(real, cp, y));
    auto e = evaluate(original, rep.assignment);
    rep.worst_block_eig = e.worst;
    rep.worst_block = e.label;
    rep.objective_value = objective_of(original, rep.assignment);
}

double resolve_margin(const LmiProblem& problem, double tolerance, const SolverOptions& opt) {
    const double base = opt.margin_override >= 0.0 ? opt.margin_override : strictness_margin(problem);
    return std::max(base, tolerance);
}

bool single_scalar_objective(const LmiProblem& problem, std::string& name, double& weight) {
    if (!problem.objective || problem.objective->size() != 1) return false;
    const auto& o = problem.objective->front();
    const auto* v = problem.find(o.variable);
    if (!v || v->dim != 1 || v->structure != Structure::symmetric) return false;
    weight = o.weight(0, 0).real();
    name = o.variable;
    return weight > 0.0 && o.weight(0, 0).imag() == 0.0;
}

}  // namespace

SolveReport solve_feasibility(const LmiProblem& problem, double tolerance, const SolverOptions& options) {
    problem.validate();
    if (problem.blocks.empty()) throw InvalidArgument("problem has no LMI blocks");
    const LmiProblem real = embed_hermitian(problem);
    SolveReport rep;
    rep.margin = resolve_margin(problem, tolerance, options);
    const CompiledProblem cp = compile(real, rep.margin);
    auto p1 = phase_one(real, cp, options);
    rep.iterations = p1.iterations;
    rep.slack = p1.slack;
    finish(problem, real, cp, p1.y, rep);
    if (p1.feasible) {
        rep.status = Status::feasible;
    } else if (p1.decided) {
        rep.status = Status::infeasible_or_unbounded;
        rep.message = "phase-1 shift stays positive (" + std::to_string(p1.slack) + "); most violated: " + rep.worst_block;
    } else {
        rep.status = Status::max_iterations;
        rep.message = "phase 1 did not settle; shift " + std::to_string(p1.slack);
    }
    return rep;
}

SolveReport minimize_objective(const LmiProblem& problem, double tolerance, const SolverOptions& options) {
    problem.validate();
    if (!problem.objective) throw InvalidArgument("minimize_objective needs an objective");
    if (problem.blocks.empty()) throw InvalidArgument("problem has no LMI blocks");
    const LmiProblem real = embed_hermitian(problem);
    SolveReport rep;
    rep.margin = resolve_margin(problem, options.eigen_tolerance, options);
    const CompiledProblem cp = compile(real, rep.margin);
    auto p1 = phase_one(real, cp, options);
    rep.iterations = p1.iterations;
    rep.slack = p1.slack;
    if (!p1.feasible) {
        finish(problem, real, cp, p1.y, rep);
        rep.status = p1.decided ? Status::infeasible_or_unbounded : Status::max_iterations;
        rep.message = "no strictly feasible point; most violated: " + rep.worst_block;
        return rep;
    }

    const int m = cp.dimension();
    Barrier bar(cp, options.box, false, 0.0);
    Vector y = p1.y;
    const Vector& c = cp.cost;
    const double cmax = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
    double t = bar.degree() / (1.0 + std::abs(c.dot(y)));
    bool converged = false;
    bool unbounded = false;
    int stalls = 0;
    for (int outer = 0; outer < options.max_outer; ++outer) {
        auto r = center(bar, c, t, y, options.max_newton, {});
        rep.iterations += r.steps;
        if (c.dot(y) <= -0.5 * options.box * cmax) {
            unbounded = true;
            break;
        }
        const double gap = bar.degree() / t;
        if (gap <= tolerance * (1.0 + std::abs(c.dot(y)))) {
            converged = true;
            break;
        }
        if (r.stalled) {
            // Precision floor: accept when already close to the tolerance.
            if (gap <= 1e3 * tolerance * (1.0 + std::abs(c.dot(y)))) {
                converged = true;
                break;
            }
            if (++stalls >= 3) break;
        }
        t *= options.barrier_growth;
    }
    (void)m;
    finish(problem, real, cp, y, rep);
    if (unbounded) {
        rep.status = Status::infeasible_or_unbounded;
        rep.message = "objective decreases to the variable box; treated as unbounded";
        return rep;
    }
    if (converged) {
        rep.status = Status::feasible;
        return rep;
    }
    std::string name;
    double w = 0.0;
    if (options.allow_bisection && single_scalar_objective(problem, name, w)) {
        SolverOptions sub = options;
        sub.allow_bisection = false;
        auto b = minimize_by_bisection(problem, tolerance, sub);
        b.iterations += rep.iterations;
        b.message = "barrier stalled; bisection fallback. " + b.message;
        return b;
    }
    rep.status = Status::max_iterations;
    rep.message = "barrier method did not reach the requested gap";
    return rep;
}

SolveReport minimize_by_bisection(const LmiProblem& problem, double tolerance, const SolverOptions& options) {
    problem.validate();
    std::string name;
    double w = 0.0;
    if (!single_scalar_objective(problem, name, w)) {
        throw InvalidArgument("bisection needs a single 1x1 objective variable with positive weight");
    }
    SolverOptions sub = options;
    sub.margin_override = resolve_margin(problem, options.eigen_tolerance, options);
    LmiProblem base = problem;
    base.objective.reset();
    SolveReport best = solve_feasibility(base, options.eigen_tolerance, sub);
    if (best.status != Status::feasible) return best;

    const auto* var = problem.find(name);
    double hi = best.assignment.at(name)(0, 0).real();
    double lo = var->definiteness == Definiteness::positive_definite ? 0.0 : -options.box;
    int iterations = best.iterations;
    int solves = 1;
    while (hi - lo > tolerance * (1.0 + std::abs(hi)) && solves < 200) {
        const double mid = 0.5 * (lo + hi);
        LmiProblem bounded = base;
        LmiBlock cap;
        cap.label = name + "<=bound";
        cap.constant = CMatrix::Constant(1, 1, Complex(-mid, 0.0));
        cap.terms.push_back({name, CMatrix::Ones(1, 1), CMatrix::Ones(1, 1), 0.5});
        bounded.blocks.push_back(std::move(cap));
        auto r = solve_feasibility(bounded, options.eigen_tolerance, sub);
        iterations += r.iterations;
        ++solves;
        if (r.status == Status::feasible) {
            best = r;
            hi = r.assignment.at(name)(0, 0).real();
        } else {
            lo = mid;
        }
    }
    best.iterations = iterations;
    best.objective_value = objective_of(problem, best.assignment);
    auto e = evaluate(problem, best.assignment);
    best.worst_block_eig = e.worst;
    best.worst_block = e.label;
    std::ostringstream os;
    os << "bisection: " << solves << " feasibility solves, bracket [" << lo << ", " << hi << "]";
    best.message = os.str();
    return best;
}

}  // namespace fdsc::sdp
