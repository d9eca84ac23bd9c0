#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fdsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Open-loop plant
//   xdot = A x + B1 d + B2 u
//   z    = C x + D1 d + D2 u
struct StateSpacePlant {
    Matrix A, B1, B2, C, D1, D2;

    int states() const { return static_cast<int>(A.rows()); }
    int disturbances() const { return static_cast<int>(B1.cols()); }
    int inputs() const { return static_cast<int>(B2.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }

    // Throws DimensionError / InvalidArgument on inconsistent or non-finite data.
    void validate() const;
};

// Analysis-form quadruple (A, B, C, D) from disturbance d to output z.
struct LtiSystem {
    Matrix A, B, C, D;

    int states() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }

    void validate() const;
};

enum class BandKind { LF, MF, HF };

std::string to_string(BandKind kind);
BandKind band_kind_from_string(const std::string& text);

// Finite frequency range, symmetric about zero. Cutoffs are in rad/s.
//   LF: |w| < wl     MF: w1 <= |w| <= w2     HF: |w| >= wh
class FrequencyBand {
public:
    BandKind kind() const { return kind_; }
    const std::vector<double>& cutoffs() const { return cutoffs_; }

    // Lowest / highest finite edge of the positive part (LF lower edge is 0,
    // HF upper edge is +inf).
    double lower_edge() const;
    double upper_edge() const;
    // Largest finite cutoff; the frequency a sampled signal must resolve.
    double highest_cutoff() const;

    // Strict interior membership of |omega|.
    bool contains(double omega) const;

    friend FrequencyBand make_band(BandKind kind, std::vector<double> cutoffs);
    friend bool operator==(const FrequencyBand&, const FrequencyBand&) = default;

private:
    BandKind kind_ = BandKind::LF;
    std::vector<double> cutoffs_;
};

// Validates cutoff count, positivity and MF ordering.
FrequencyBand make_band(BandKind kind, std::vector<double> cutoffs);

std::string describe(const FrequencyBand& band);

// Frequency-weighting pair of the generalized KYP lemma.
struct HermitianPair {
    Eigen::Matrix2d phi;
    Eigen::Matrix2cd psi;
};

// Phi = [[0,1],[1,0]] (continuous time).
Eigen::Matrix2d phi_matrix();

// LF: [[-1,0],[0,wl^2]]
// MF: [[-1, j wc],[-j wc, -w1 w2]], wc = (w1 + w2) / 2
// HF: [[1,0],[0,-wh^2]]
Eigen::Matrix2cd psi_matrix(const FrequencyBand& band);

HermitianPair hermitian_pair(const FrequencyBand& band);

// q(w) = [jw; 1]^* Psi [jw; 1]; positive inside the band, negative outside
// (MF: positive axis only).
double band_indicator(const FrequencyBand& band, double omega);

// (A + B2 K, B1, C + D2 K, D1)
LtiSystem close_loop(const StateSpacePlant& plant, const Matrix& K);

// Disturbance channel of the open loop: (A, B1, C, D1).
LtiSystem open_loop(const StateSpacePlant& plant);

// G(jw) = C (jw I - A)^{-1} B + D. Throws SingularResolvent when jw I - A is
// (numerically) singular.
CMatrix transfer_eval(const LtiSystem& sys, double omega);

double sigma_max(const CMatrix& G);

struct SigmaPoint {
    double omega;
    double sigma;
};

std::vector<double> log_grid(double lo, double hi, int count, bool include_hi = true);

struct GridOptions {
    double omega_min = 1e-3;  // lower end for LF grids
    double omega_max = 1e4;   // HF truncation
};

// Log-spaced positive-axis grid covering the band:
//   LF [omega_min, wl), MF [w1, w2), HF [wh, omega_max].
std::vector<double> band_grid(const FrequencyBand& band, int count, const GridOptions& options = {});

// OpenMP-parallel over grid points; bitwise identical to the serial version.
std::vector<SigmaPoint> sigma_max_sweep(const LtiSystem& sys, const std::vector<double>& grid);
std::vector<SigmaPoint> sigma_max_sweep_serial(const LtiSystem& sys, const std::vector<double>& grid);

double band_peak_gain(const LtiSystem& sys, const FrequencyBand& band, int points_per_decade,
                      const GridOptions& options = {});

double peak_of(const std::vector<SigmaPoint>& sweep);

bool is_hurwitz(const Matrix& A, double margin = 1e-10);

}  // namespace fdsc
