#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "floquet/circuit.hpp"
#include "floquet/rng.hpp"

namespace floquet {

// Eigenphases of a unitary, each wrapped to [0, 2pi).
struct QuasiEnergySpectrum {
    std::vector<double> phases;
};

// Monte Carlo estimate of K(t) = <|Tr U^t|^2>.
struct SffEstimate {
    long long t = 0;
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(n_samples)
    std::size_t n_samples = 0;
};

// Pair-difference histogram estimating the two-level correlation. Densities
// are counts of ordered pairs with (theta_i - theta_j) mod 2pi falling in the
// bin, normalized by (2pi * bin_width * n_samples); with include_diagonal
// false the i = j self-pairs (the delta term at zero separation) are excluded
// and handled analytically by callers.
struct R2Histogram {
    std::vector<double> bin_edges;   // bins+1 edges, uniform over [0, 2pi]
    std::vector<double> densities;   // per-bin estimate, size bins
    std::vector<double> std_errors;  // per-bin standard error across samples
    bool include_diagonal = false;
    std::size_t n_samples = 0;
};

// One member of an ensemble: a circuit family member, a tensor product of
// single-site CUE factors, or a bare CUE matrix.
struct EnsembleModel {
    enum class Kind { circuit, noninteracting, single_cue };

    Kind kind = Kind::single_cue;
    CircuitSpec circuit;        // kind == circuit
    int local_dim = 2;          // kind == noninteracting
    int linear_size = 1;        // kind == noninteracting
    std::size_t cue_dim = 2;    // kind == single_cue

    static EnsembleModel from_circuit(CircuitSpec spec);
    static EnsembleModel from_noninteracting(int q, int linear_size);
    static EnsembleModel from_single_cue(std::size_t dim);

    std::size_t dim() const;
    UnitaryMatrix realize(SeedSpec seed) const;
};

// Eigenphases wrapped to [0, 2pi). The reconstructed trace sum_j e^{i theta_j}
// must reproduce Tr U to 1e-8 * N, else the input was not unitary enough and
// a runtime error is thrown (likewise on eigensolver failure).
QuasiEnergySpectrum eigenphases(const UnitaryMatrix& u);

// |sum_j e^{i theta_j t}|^2 for one realization; N^2 at t = 0, even in t.
double sff_exact(const QuasiEnergySpectrum& spectrum, long long t);

// Draws n_samples realizations (stream index = sample index) and returns their
// spectra in sample order; the result is independent of the worker count.
std::vector<QuasiEnergySpectrum> sample_spectra(const EnsembleModel& model,
                                                std::size_t n_samples,
                                                std::uint64_t master_seed, std::size_t workers);

// Ensemble mean and standard error of |Tr U^t|^2 at each t in t_list. One
// eigendecomposition per sample serves every t. Requires n_samples >= 2.
std::vector<SffEstimate> sff_mc(const EnsembleModel& model, const std::vector<long long>& t_list,
                                std::size_t n_samples, std::uint64_t master_seed,
                                std::size_t workers);

// Histogram of ordered pair differences over the given spectra (>= 1 required)
// with `bins` uniform bins on [0, 2pi).
R2Histogram r2bar_estimate(const std::vector<QuasiEnergySpectrum>& spectra, std::size_t bins,
                           bool include_diagonal = false);

// CUE two-level correlation at separation dphi in (0, 2pi), delta term
// excluded: -(1/4pi^2) sin^2(N dphi/2)/sin^2(dphi/2) + N^2/4pi^2.
double cue_r2bar(std::size_t n, double dphi);

// Average of cue_r2bar over [a, b], 0 <= a < b <= 2pi, via the closed-form
// antiderivative of the Fejer kernel; finite even when the bin touches 0.
double cue_r2bar_bin_average(std::size_t n, double a, double b);

// Connected correlation in rescaled separation: -(sin(pi eps)/(pi eps))^2.
double cue_r2_connected_scaled(double eps);

// K(t) = min(|t|, N) + N^2 delta_{t,0}.
double cue_sff(std::size_t n, long long t);

// x/(1-x)^2; generating function of the linear ramp (series coefficient of
// x^n is n). Pole at x = 1 is a domain error.
std::complex<double> sigma_correlator(std::complex<double> x);

// Smoothed two-level correlation: -1/(8pi^2 sin^2(dphi/2)) + N^2/4pi^2 for
// dphi in (0, 2pi); equals the local oscillation average of cue_r2bar.
double sigma_r2bar(std::size_t n, double dphi);

}  // namespace floquet
