#include "fdsc/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "fdsc/error.hpp"

namespace fdsc {

namespace {

void require_finite(const Matrix& M, const char* name) {
    if (!M.allFinite()) {
        throw InvalidArgument(std::string("matrix ") + name + " has non-finite entries", name);
    }
}

void require_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (M.rows() != rows || M.cols() != cols) {
        std::ostringstream os;
        os << "matrix " << name << " is " << M.rows() << "x" << M.cols() << ", expected " << rows << "x" << cols;
        throw DimensionError(os.str(), name);
    }
}

}  // namespace

void StateSpacePlant::validate() const {
    const auto n = A.rows();
    if (n == 0 || A.cols() != n) throw DimensionError("A must be square and non-empty", "A");
    const auto nd = B1.cols();
    const auto nu = B2.cols();
    const auto nz = C.rows();
    require_shape(B1, n, nd, "B1");
    require_shape(B2, n, nu, "B2");
    require_shape(C, nz, n, "C");
    require_shape(D1, nz, nd, "D1");
    require_shape(D2, nz, nu, "D2");
    require_finite(A, "A");
    require_finite(B1, "B1");
    require_finite(B2, "B2");
    require_finite(C, "C");
    require_finite(D1, "D1");
    require_finite(D2, "D2");
}

void LtiSystem::validate() const {
    const auto n = A.rows();
    if (n == 0 || A.cols() != n) throw DimensionError("A must be square and non-empty", "A");
    require_shape(B, n, B.cols(), "B");
    require_shape(C, C.rows(), n, "C");
    require_shape(D, C.rows(), B.cols(), "D");
    require_finite(A, "A");
    require_finite(B, "B");
    require_finite(C, "C");
    require_finite(D, "D");
}

std::string to_string(BandKind kind) {
    switch (kind) {
        case BandKind::LF: return "LF";
        case BandKind::MF: return "MF";
        case BandKind::HF: return "HF";
    }
    return "?";
}

BandKind band_kind_from_string(const std::string& text) {
    if (text == "LF") return BandKind::LF;
    if (text == "MF") return BandKind::MF;
    if (text == "HF") return BandKind::HF;
    throw InvalidArgument("unknown band kind '" + text + "'", "kind");
}

FrequencyBand make_band(BandKind kind, std::vector<double> cutoffs) {
    const std::size_t expected = kind == BandKind::MF ? 2 : 1;
    if (cutoffs.size() != expected) {
        throw InvalidArgument(to_string(kind) + " band needs " + std::to_string(expected) + " cutoff(s)", "cutoffs");
    }
    for (double c : cutoffs) {
        if (!std::isfinite(c) || c <= 0.0) throw InvalidArgument("band cutoffs must be finite and positive", "cutoffs");
    }
    if (kind == BandKind::MF && !(cutoffs[0] < cutoffs[1])) {
        throw InvalidArgument("MF band requires w1 < w2", "cutoffs");
    }
    FrequencyBand band;
    band.kind_ = kind;
    band.cutoffs_ = std::move(cutoffs);
    return band;
}

double FrequencyBand::lower_edge() const {
    switch (kind_) {
        case BandKind::LF: return 0.0;
        case BandKind::MF: return cutoffs_[0];
        case BandKind::HF: return cutoffs_[0];
    }
    return 0.0;
}

double FrequencyBand::upper_edge() const {
    switch (kind_) {
        case BandKind::LF: return cutoffs_[0];
        case BandKind::MF: return cutoffs_[1];
        case BandKind::HF: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double FrequencyBand::highest_cutoff() const { return cutoffs_.back(); }

bool FrequencyBand::contains(double omega) const {
    const double w = std::abs(omega);
    switch (kind_) {
        case BandKind::LF: return w < cutoffs_[0];
        case BandKind::MF: return w > cutoffs_[0] && w < cutoffs_[1];
        case BandKind::HF: return w > cutoffs_[0];
    }
    return false;
}

std::string describe(const FrequencyBand& band) {
    std::ostringstream os;
    os << to_string(band.kind()) << "(";
    for (std::size_t i = 0; i < band.cutoffs().size(); ++i) os << (i ? "," : "") << band.cutoffs()[i];
    os << ")";
    return os.str();
}

Eigen::Matrix2d phi_matrix() {
    Eigen::Matrix2d phi;
    phi << 0.0, 1.0, 1.0, 0.0;
    return phi;
}

Eigen::Matrix2cd psi_matrix(const FrequencyBand& band) {
    Eigen::Matrix2cd psi = Eigen::Matrix2cd::Zero();
    const auto& c = band.cutoffs();
    switch (band.kind()) {
        case BandKind::LF:
            psi(0, 0) = -1.0;
            psi(1, 1) = c[0] * c[0];
            break;
        case BandKind::MF: {
            const double wc = 0.5 * (c[0] + c[1]);
            psi(0, 0) = -1.0;
            psi(0, 1) = Complex(0.0, wc);
            psi(1, 0) = Complex(0.0, -wc);
            psi(1, 1) = -c[0] * c[1];
            break;
        }
        case BandKind::HF:
            psi(0, 0) = 1.0;
            psi(1, 1) = -c[0] * c[0];
            break;
    }
    return psi;
}

HermitianPair hermitian_pair(const FrequencyBand& band) { return {phi_matrix(), psi_matrix(band)}; }

double band_indicator(const FrequencyBand& band, double omega) {
    Eigen::Vector2cd v(Complex(0.0, omega), 1.0);
    return (v.adjoint() * psi_matrix(band) * v)(0, 0).real();
}

LtiSystem close_loop(const StateSpacePlant& plant, const Matrix& K) {
    plant.validate();
    if (K.rows() != plant.inputs() || K.cols() != plant.states()) {
        std::ostringstream os;
        os << "gain is " << K.rows() << "x" << K.cols() << ", expected " << plant.inputs() << "x" << plant.states();
        throw DimensionError(os.str(), "K");
    }
    if (!K.allFinite()) throw InvalidArgument("gain has non-finite entries", "K");
    return {plant.A + plant.B2 * K, plant.B1, plant.C + plant.D2 * K, plant.D1};
}

LtiSystem open_loop(const StateSpacePlant& plant) {
    plant.validate();
    return {plant.A, plant.B1, plant.C, plant.D1};
}

CMatrix transfer_eval(const LtiSystem& sys, double omega) {
    const auto n = sys.states();
    CMatrix resolvent = CMatrix::Identity(n, n) * Complex(0.0, omega) - sys.A.cast<Complex>();
    Eigen::PartialPivLU<CMatrix> lu(resolvent);
    const double scale = std::max(1.0, resolvent.cwiseAbs().maxCoeff());
    // rcond() is only an estimate; the pivot check catches exact singularity.
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e-13 * scale) || lu.rcond() < 1e-14) {
        std::ostringstream os;
        os << "jwI - A is singular at omega = " << omega;
        throw SingularResolvent(os.str());
    }
    return sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>()) + sys.D.cast<Complex>();
}

double sigma_max(const CMatrix& G) {
    if (G.size() == 0) return 0.0;
    if (G.cols() == 1) return G.col(0).norm();
    Eigen::JacobiSVD<CMatrix> svd(G);
    return svd.singularValues()(0);
}

std::vector<double> log_grid(double lo, double hi, int count, bool include_hi) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InvalidArgument("log grid needs 0 < lo < hi and count >= 2");
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    const double denom = include_hi ? count - 1 : count;
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / denom);
    return grid;
}

std::vector<double> band_grid(const FrequencyBand& band, int count, const GridOptions& options) {
    const auto& c = band.cutoffs();
    switch (band.kind()) {
        case BandKind::LF: return log_grid(options.omega_min, c[0], count, false);
        case BandKind::MF: return log_grid(c[0], c[1], count, false);
        case BandKind::HF: return log_grid(c[0], std::max(options.omega_max, c[0] * 10.0), count, true);
    }
    return {};
}

std::vector<SigmaPoint> sigma_max_sweep_serial(const LtiSystem& sys, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("frequency grid is empty", "grid");
    sys.validate();
    std::vector<SigmaPoint> out;
    out.reserve(grid.size());
    for (double w : grid) out.push_back({w, sigma_max(transfer_eval(sys, w))});
    return out;
}

std::vector<SigmaPoint> sigma_max_sweep(const LtiSystem& sys, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("frequency grid is empty", "grid");
    sys.validate();
    const auto count = static_cast<long>(grid.size());
    std::vector<SigmaPoint> out(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = {grid[k], sigma_max(transfer_eval(sys, grid[k]))};
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

double peak_of(const std::vector<SigmaPoint>& sweep) {
    double peak = 0.0;
    for (const auto& p : sweep) peak = std::max(peak, p.sigma);
    return peak;
}

double band_peak_gain(const LtiSystem& sys, const FrequencyBand& band, int points_per_decade,
                      const GridOptions& options) {
    if (points_per_decade < 10) throw InvalidArgument("points_per_decade must be >= 10", "points_per_decade");
    const auto probe = band_grid(band, 2, options);
    const double decades = std::log10(probe.back() / probe.front());
    const int count = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
    return peak_of(sigma_max_sweep(sys, band_grid(band, count, options)));
}

bool is_hurwitz(const Matrix& A, double margin) {
    Eigen::EigenSolver<Matrix> es(A, false);
    if (es.info() != Eigen::Success) return false;
    return (es.eigenvalues().real().array() < -margin).all();
}

}  // namespace fdsc
