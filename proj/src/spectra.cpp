#include "floquet/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "floquet/parallel.hpp"

namespace floquet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double theta) {
    if (theta < 0.0) theta += kTwoPi;
    if (theta >= kTwoPi) theta -= kTwoPi;  // guard against rounding at the seam
    return theta == 0.0 ? 0.0 : theta;     // normalize -0.0
}

void require_separation(double dphi) {
    if (!(dphi > 0.0 && dphi < kTwoPi))
        throw std::domain_error("two-level formulas need dphi in (0, 2pi); the zero-separation "
                                "delta term is handled analytically");
}

struct MeanErr {
    double mean;
    double std_error;
};

MeanErr reduce(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    if (v.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= n - 1.0;
    return {mean, std::sqrt(var / n)};
}

}  // namespace

EnsembleModel EnsembleModel::from_circuit(CircuitSpec spec) {
    const std::vector<std::string> violations = validate(spec);
    if (!violations.empty())
        throw std::invalid_argument("EnsembleModel: invalid circuit spec: " + violations.front());
    EnsembleModel m;
    m.kind = Kind::circuit;
    m.circuit = std::move(spec);
    return m;
}

EnsembleModel EnsembleModel::from_noninteracting(int q, int linear_size) {
    if (q < 2 || linear_size < 1)
        throw std::invalid_argument("EnsembleModel: need q >= 2, L >= 1");
    std::size_t n = 1;
    for (int i = 0; i < linear_size; ++i) {
        n *= static_cast<std::size_t>(q);
        if (n > 4096)
            throw std::length_error("EnsembleModel: q^L exceeds the dense ceiling of 4096");
    }
    EnsembleModel m;
    m.kind = Kind::noninteracting;
    m.local_dim = q;
    m.linear_size = linear_size;
    return m;
}

EnsembleModel EnsembleModel::from_single_cue(std::size_t dim) {
    if (dim < 1) throw std::invalid_argument("EnsembleModel: need dim >= 1");
    EnsembleModel m;
    m.kind = Kind::single_cue;
    m.cue_dim = dim;
    return m;
}

std::size_t EnsembleModel::dim() const {
    switch (kind) {
        case Kind::circuit:
            return hilbert_dim(circuit);
        case Kind::noninteracting: {
            std::size_t n = 1;
            for (int i = 0; i < linear_size; ++i) n *= static_cast<std::size_t>(local_dim);
            return n;
        }
        case Kind::single_cue:
            return cue_dim;
    }
    throw std::logic_error("EnsembleModel: bad kind");
}

UnitaryMatrix EnsembleModel::realize(SeedSpec seed) const {
    switch (kind) {
        case Kind::circuit:
            return build_floquet(circuit, seed);
        case Kind::noninteracting:
            return build_noninteracting(local_dim, linear_size, seed).u;
        case Kind::single_cue:
            return cue_sample(cue_dim, seed);
    }
    throw std::logic_error("EnsembleModel: bad kind");
}

QuasiEnergySpectrum eigenphases(const UnitaryMatrix& u) {
    const Eigen::Index n = u.rows();
    if (n < 1 || u.cols() != n) throw std::invalid_argument("eigenphases: square matrix required");

    Eigen::ComplexEigenSolver<UnitaryMatrix> solver(u, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenphases: eigensolver failed to converge");

    QuasiEnergySpectrum spectrum;
    spectrum.phases.reserve(static_cast<std::size_t>(n));
    std::complex<double> reconstructed{0.0, 0.0};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double theta = wrap_phase(std::arg(solver.eigenvalues()(i)));
        spectrum.phases.push_back(theta);
        reconstructed += std::polar(1.0, theta);
    }
    const double drift = std::abs(reconstructed - u.trace());
    if (drift > 1e-8 * static_cast<double>(n))
        throw std::runtime_error("eigenphases: eigenvalue phases do not reproduce the trace; "
                                 "input is not unitary to working precision");
    return spectrum;
}

double sff_exact(const QuasiEnergySpectrum& spectrum, long long t) {
    double re = 0.0, im = 0.0;
    for (double theta : spectrum.phases) {
        const double a = theta * static_cast<double>(t);
        re += std::cos(a);
        im += std::sin(a);
    }
    return re * re + im * im;
}

std::vector<QuasiEnergySpectrum> sample_spectra(const EnsembleModel& model,
                                                std::size_t n_samples,
                                                std::uint64_t master_seed, std::size_t workers) {
    if (n_samples < 1) throw std::invalid_argument("sample_spectra: need n_samples >= 1");
    std::vector<QuasiEnergySpectrum> out(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        out[i] = eigenphases(model.realize(derive_stream(master_seed, i)));
    });
    return out;
}

std::vector<SffEstimate> sff_mc(const EnsembleModel& model, const std::vector<long long>& t_list,
                                std::size_t n_samples, std::uint64_t master_seed,
                                std::size_t workers) {
    if (n_samples < 2) throw std::invalid_argument("sff_mc: need n_samples >= 2");
    if (t_list.empty()) throw std::invalid_argument("sff_mc: empty t_list");

    // values[k][i] = |Tr U_i^{t_k}|^2, written into per-sample slots so the
    // reduction below is independent of the worker count.
    std::vector<std::vector<double>> values(t_list.size(), std::vector<double>(n_samples, 0.0));
    parallel_for(n_samples, workers, [&](std::size_t i) {
        const QuasiEnergySpectrum spectrum =
            eigenphases(model.realize(derive_stream(master_seed, i)));
        for (std::size_t k = 0; k < t_list.size(); ++k)
            values[k][i] = sff_exact(spectrum, t_list[k]);
    });

    std::vector<SffEstimate> out;
    out.reserve(t_list.size());
    for (std::size_t k = 0; k < t_list.size(); ++k) {
        const MeanErr m = reduce(values[k]);
        out.push_back(SffEstimate{t_list[k], m.mean, m.std_error, n_samples});
    }
    return out;
}

R2Histogram r2bar_estimate(const std::vector<QuasiEnergySpectrum>& spectra, std::size_t bins,
                           bool include_diagonal) {
    if (spectra.empty()) throw std::invalid_argument("r2bar_estimate: need >= 1 spectrum");
    if (bins < 1) throw std::invalid_argument("r2bar_estimate: need >= 1 bin");

    const double width = kTwoPi / static_cast<double>(bins);
    R2Histogram hist;
    hist.include_diagonal = include_diagonal;
    hist.n_samples = spectra.size();
    hist.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        hist.bin_edges[b] = static_cast<double>(b) * width;
    hist.bin_edges[bins] = kTwoPi;

    // Per-sample densities first; mean and stderr are taken across samples.
    std::vector<std::vector<double>> per_sample(bins,
                                                std::vector<double>(spectra.size(), 0.0));
    const double norm = 1.0 / (kTwoPi * width);
    for (std::size_t s = 0; s < spectra.size(); ++s) {
        const std::vector<double>& phases = spectra[s].phases;
        for (std::size_t i = 0; i < phases.size(); ++i) {
            for (std::size_t j = 0; j < phases.size(); ++j) {
                if (i == j && !include_diagonal) continue;
                const double diff = wrap_phase(phases[i] - phases[j]);
                std::size_t b = static_cast<std::size_t>(diff / width);
                if (b >= bins) b = bins - 1;  // diff == 2pi rounding guard
                per_sample[b][s] += norm;
            }
        }
    }

    hist.densities.resize(bins);
    hist.std_errors.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const MeanErr m = reduce(per_sample[b]);
        hist.densities[b] = m.mean;
        hist.std_errors[b] = m.std_error;
    }
    return hist;
}

double cue_r2bar(std::size_t n, double dphi) {
    require_separation(dphi);
    const double nd = static_cast<double>(n);
    const double fast = std::sin(nd * dphi / 2.0);
    const double slow = std::sin(dphi / 2.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return -(fast * fast) / (slow * slow) / (4.0 * pi2) + nd * nd / (4.0 * pi2);
}

double cue_r2bar_bin_average(std::size_t n, double a, double b) {
    if (!(a >= 0.0 && a < b && b <= kTwoPi))
        throw std::domain_error("cue_r2bar_bin_average: need 0 <= a < b <= 2pi");
    const double nd = static_cast<double>(n);
    // integral of the Fejer kernel sin^2(n t/2)/sin^2(t/2)
    //   = n (b-a) + sum_{m=1}^{n-1} 2 (n-m) (sin mb - sin ma)/m.
    double kernel_integral = nd * (b - a);
    for (std::size_t m = 1; m < n; ++m) {
        const double md = static_cast<double>(m);
        kernel_integral +=
            2.0 * (nd - md) * (std::sin(md * b) - std::sin(md * a)) / md;
    }
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return -kernel_integral / (4.0 * pi2 * (b - a)) + nd * nd / (4.0 * pi2);
}

double cue_r2_connected_scaled(double eps) {
    if (eps == 0.0)
        throw std::domain_error("cue_r2_connected_scaled: eps = 0 is the excluded delta point");
    const double x = std::numbers::pi * eps;
    const double s = std::sin(x) / x;
    return -s * s;
}

double cue_sff(std::size_t n, long long t) {
    const double nd = static_cast<double>(n);
    if (t == 0) return nd * nd;
    const double at = static_cast<double>(t < 0 ? -t : t);
    return std::min(at, nd);
}

std::complex<double> sigma_correlator(std::complex<double> x) {
    if (x == std::complex<double>{1.0, 0.0})
        throw std::domain_error("sigma_correlator: pole at x = 1");
    const std::complex<double> one_minus = 1.0 - x;
    return x / (one_minus * one_minus);
}

double sigma_r2bar(std::size_t n, double dphi) {
    require_separation(dphi);
    const double nd = static_cast<double>(n);
    const double slow = std::sin(dphi / 2.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return -1.0 / (8.0 * pi2 * slow * slow) + nd * nd / (4.0 * pi2);
}

}  // namespace floquet
