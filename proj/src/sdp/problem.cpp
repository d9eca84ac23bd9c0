#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fdsc/error.hpp"
#include "fdsc/sdp.hpp"

namespace fdsc::sdp {

namespace {

bool has_imag(const CMatrix& M) { return M.size() > 0 && M.imag().cwiseAbs().maxCoeff() > 0.0; }

Matrix basis(const MatrixVariable& v, int row, int col) {
    Matrix E = Matrix::Zero(v.dim, v.dim);
    if (v.structure == Structure::skew_symmetric) {
        E(row, col) = 1.0;
        E(col, row) = -1.0;
    } else {
        E(row, col) = 1.0;
        E(col, row) = 1.0;
    }
    return E;
}

void check_structure(const MatrixVariable& v, const CMatrix& X) {
    if (X.rows() != v.dim || X.cols() != v.dim) {
        throw DimensionError("value for '" + v.name + "' has wrong shape", v.name);
    }
}

}  // namespace

std::string to_string(Status s) {
    switch (s) {
        case Status::feasible: return "feasible";
        case Status::infeasible_or_unbounded: return "infeasible_or_unbounded";
        case Status::max_iterations: return "max_iterations";
    }
    return "?";
}

const MatrixVariable* LmiProblem::find(const std::string& name) const {
    for (const auto& v : variables) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

MatrixVariable& LmiProblem::add_variable(std::string name, int dim, Structure s, Definiteness d) {
    variables.push_back({std::move(name), dim, s, d});
    return variables.back();
}

void LmiProblem::validate() const {
    std::set<std::string> names;
    for (const auto& v : variables) {
        if (v.dim < 1) throw InvalidArgument("variable '" + v.name + "' has dim < 1", v.name);
        if (!names.insert(v.name).second) throw InvalidArgument("duplicate variable '" + v.name + "'", v.name);
        if (v.structure == Structure::skew_symmetric && v.definiteness == Definiteness::positive_definite) {
            throw InvalidArgument("skew-symmetric variable cannot be definite", v.name);
        }
    }
    for (const auto& b : blocks) {
        const auto n = b.constant.rows();
        if (n == 0 || b.constant.cols() != n) throw DimensionError("block '" + b.label + "' is not square", b.label);
        if ((b.constant - b.constant.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + b.constant.cwiseAbs().maxCoeff())) {
            throw InvalidArgument("block '" + b.label + "' constant is not Hermitian", b.label);
        }
        for (const auto& t : b.terms) {
            const auto* v = find(t.variable);
            if (!v) throw InvalidArgument("block '" + b.label + "' references unknown variable '" + t.variable + "'", t.variable);
            if (t.left.rows() != n || t.left.cols() != v->dim || t.right.rows() != v->dim || t.right.cols() != n) {
                throw DimensionError("term on '" + t.variable + "' in block '" + b.label + "' has mismatched factors", t.variable);
            }
            if (!t.left.allFinite() || !t.right.allFinite() || !std::isfinite(t.coeff)) {
                throw InvalidArgument("non-finite term data in block '" + b.label + "'", b.label);
            }
        }
    }
    if (objective) {
        for (const auto& o : *objective) {
            const auto* v = find(o.variable);
            if (!v) throw InvalidArgument("objective references unknown variable '" + o.variable + "'", o.variable);
            if (o.weight.rows() != v->dim || o.weight.cols() != v->dim) {
                throw DimensionError("objective weight for '" + o.variable + "' has wrong shape", o.variable);
            }
        }
    }
}

bool LmiProblem::is_real() const {
    for (const auto& v : variables) {
        if (v.structure == Structure::hermitian) return false;
    }
    for (const auto& b : blocks) {
        if (b.complex_field || has_imag(b.constant)) return false;
        for (const auto& t : b.terms) {
            if (has_imag(t.left) || has_imag(t.right)) return false;
        }
    }
    if (objective) {
        for (const auto& o : *objective) {
            if (has_imag(o.weight)) return false;
        }
    }
    return true;
}

double LmiProblem::largest_constant_norm() const {
    double best = 0.0;
    for (const auto& b : blocks) {
        if (b.constant.size() == 0) continue;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(b.constant, Eigen::EigenvaluesOnly);
        best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    return best;
}

double strictness_margin(const LmiProblem& problem) { return 1e-7 * (1.0 + problem.largest_constant_norm()); }

CMatrix assemble_block(const LmiBlock& block, const Assignment& values) {
    CMatrix F = block.constant;
    for (const auto& t : block.terms) {
        auto it = values.find(t.variable);
        if (it == values.end()) throw InvalidArgument("assignment is missing variable '" + t.variable + "'", t.variable);
        CMatrix M = t.left * it->second * t.right;
        F += t.coeff * (M + M.adjoint());
    }
    return F;
}

LmiProblem embed_hermitian(const LmiProblem& problem) {
    problem.validate();
    if (problem.is_real()) return problem;

    const Complex j(0.0, 1.0);
    LmiProblem out;
    std::vector<LmiBlock> extra;
    for (const auto& v : problem.variables) {
        if (v.structure != Structure::hermitian) {
            out.variables.push_back(v);
            continue;
        }
        out.add_variable(v.name + ".re", v.dim, Structure::symmetric);
        out.add_variable(v.name + ".im", v.dim, Structure::skew_symmetric);
        if (v.definiteness == Definiteness::positive_definite) {
            LmiBlock b;
            b.label = v.name + ">0";
            b.constant = CMatrix::Zero(v.dim, v.dim);
            b.sense = Sense::positive_definite;
            b.complex_field = true;
            const CMatrix I = CMatrix::Identity(v.dim, v.dim);
            b.terms.push_back({v.name, I, I, 0.5});
            extra.push_back(std::move(b));
        }
    }

    auto expand = [&](const LmiBlock& b) {
        LmiBlock e = b;
        e.terms.clear();
        for (const auto& t : b.terms) {
            const auto* v = problem.find(t.variable);
            if (v && v->structure == Structure::hermitian) {
                e.terms.push_back({t.variable + ".re", t.left, t.right, t.coeff});
                e.terms.push_back({t.variable + ".im", j * t.left, t.right, t.coeff});
            } else {
                e.terms.push_back(t);
            }
        }
        return e;
    };

    auto embed = [](const LmiBlock& b) {
        bool complex = b.complex_field || has_imag(b.constant);
        for (const auto& t : b.terms) complex = complex || has_imag(t.left) || has_imag(t.right);
        if (!complex) return b;
        const auto n = b.constant.rows();
        LmiBlock e;
        e.label = b.label;
        e.sense = b.sense;
        e.constant = CMatrix::Zero(2 * n, 2 * n);
        const Matrix re = b.constant.real();
        const Matrix im = b.constant.imag();
        e.constant.topLeftCorner(n, n) = re.cast<Complex>();
        e.constant.topRightCorner(n, n) = (-im).cast<Complex>();
        e.constant.bottomLeftCorner(n, n) = im.cast<Complex>();
        e.constant.bottomRightCorner(n, n) = re.cast<Complex>();
        for (const auto& t : b.terms) {
            const Matrix Lr = t.left.real(), Li = t.left.imag();
            const Matrix Rr = t.right.real(), Ri = t.right.imag();
            const auto d = Lr.cols();
            CMatrix L1(2 * n, d), R1(d, 2 * n), L2(2 * n, d), R2(d, 2 * n);
            L1 << Lr.cast<Complex>(), Li.cast<Complex>();
            R1 << Rr.cast<Complex>(), (-Ri).cast<Complex>();
            L2 << (-Li).cast<Complex>(), Lr.cast<Complex>();
            R2 << Ri.cast<Complex>(), Rr.cast<Complex>();
            e.terms.push_back({t.variable, L1, R1, t.coeff});
            e.terms.push_back({t.variable, L2, R2, t.coeff});
        }
        return e;
    };

    for (const auto& b : problem.blocks) out.blocks.push_back(embed(expand(b)));
    for (const auto& b : extra) out.blocks.push_back(embed(expand(b)));

    if (problem.objective) {
        std::vector<ObjectiveTerm> obj;
        for (const auto& o : *problem.objective) {
            const auto* v = problem.find(o.variable);
            if (v->structure == Structure::hermitian) {
                obj.push_back({o.variable + ".re", o.weight.real().cast<Complex>()});
                if (has_imag(o.weight)) obj.push_back({o.variable + ".im", (-o.weight.imag()).cast<Complex>()});
            } else {
                obj.push_back({o.variable, o.weight.real().cast<Complex>()});
            }
        }
        out.objective = std::move(obj);
    }
    return out;
}

Assignment collapse_assignment(const LmiProblem& original, const Assignment& embedded) {
    Assignment out;
    for (const auto& v : original.variables) {
        if (v.structure == Structure::hermitian) {
            const auto re = embedded.find(v.name + ".re");
            const auto im = embedded.find(v.name + ".im");
            if (re == embedded.end() || im == embedded.end()) continue;
            out[v.name] = re->second + Complex(0.0, 1.0) * im->second;
        } else {
            auto it = embedded.find(v.name);
            if (it != embedded.end()) out[v.name] = it->second;
        }
    }
    return out;
}

CompiledProblem compile(const LmiProblem& problem, double margin) {
    problem.validate();
    if (!problem.is_real()) throw InvalidArgument("compile needs a real problem; apply embed_hermitian first");

    CompiledProblem cp;
    cp.margin = margin;
    std::map<std::string, std::vector<int>> scalar_index;
    for (const auto& v : problem.variables) {
        auto& idx = scalar_index[v.name];
        for (int r = 0; r < v.dim; ++r) {
            for (int c = (v.structure == Structure::skew_symmetric ? r + 1 : r); c < v.dim; ++c) {
                idx.push_back(static_cast<int>(cp.scalars.size()));
                cp.scalars.push_back({v.name, r, c});
            }
        }
    }
    const int m = cp.dimension();

    auto coefficient = [&](const LmiBlock& b, int k) {
        const auto& s = cp.scalars[static_cast<std::size_t>(k)];
        const auto* v = problem.find(s.variable);
        const Matrix E = basis(*v, s.row, s.col);
        const auto n = b.constant.rows();
        Matrix F = Matrix::Zero(n, n);
        for (const auto& t : b.terms) {
            if (t.variable != s.variable) continue;
            Matrix M = t.left.real() * E * t.right.real();
            F += t.coeff * (M + M.transpose());
        }
        return F;
    };

    for (const auto& b : problem.blocks) {
        CompiledProblem::Block cb;
        cb.label = b.label;
        const double sign = b.sense == Sense::negative_definite ? -1.0 : 1.0;
        const auto n = b.constant.rows();
        cb.g0 = sign * b.constant.real() - margin * Matrix::Identity(n, n);
        cb.gk.reserve(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) cb.gk.push_back(sign * coefficient(b, k));
        cp.blocks.push_back(std::move(cb));
    }
    for (const auto& v : problem.variables) {
        if (v.definiteness != Definiteness::positive_definite) continue;
        CompiledProblem::Block cb;
        cb.label = v.name + ">0";
        cb.g0 = -margin * Matrix::Identity(v.dim, v.dim);
        for (int k = 0; k < m; ++k) {
            const auto& s = cp.scalars[static_cast<std::size_t>(k)];
            cb.gk.push_back(s.variable == v.name ? basis(v, s.row, s.col) : Matrix::Zero(v.dim, v.dim));
        }
        cp.blocks.push_back(std::move(cb));
    }
    if (problem.objective) {
        cp.cost = Vector::Zero(m);
        for (const auto& o : *problem.objective) {
            const auto* v = problem.find(o.variable);
            const Matrix W = o.weight.real();
            for (int k : scalar_index[o.variable]) {
                const auto& s = cp.scalars[static_cast<std::size_t>(k)];
                cp.cost(k) += (W * basis(*v, s.row, s.col)).trace();
            }
        }
    }
    return cp;
}

Vector pack(const CompiledProblem& cp, const Assignment& values) {
    Vector y(cp.dimension());
    for (int k = 0; k < cp.dimension(); ++k) {
        const auto& s = cp.scalars[static_cast<std::size_t>(k)];
        auto it = values.find(s.variable);
        if (it == values.end()) throw InvalidArgument("assignment is missing variable '" + s.variable + "'", s.variable);
        y(k) = it->second(s.row, s.col).real();
    }
    return y;
}

Assignment unpack(const LmiProblem& problem, const CompiledProblem& cp, const Vector& y) {
    Assignment out;
    for (const auto& v : problem.variables) out[v.name] = CMatrix::Zero(v.dim, v.dim);
    for (int k = 0; k < cp.dimension(); ++k) {
        const auto& s = cp.scalars[static_cast<std::size_t>(k)];
        const auto* v = problem.find(s.variable);
        auto& X = out[s.variable];
        X(s.row, s.col) = y(k);
        X(s.col, s.row) = v->structure == Structure::skew_symmetric ? -y(k) : y(k);
    }
    for (const auto& v : problem.variables) check_structure(v, out[v.name]);
    return out;
}

}  // namespace fdsc::sdp
