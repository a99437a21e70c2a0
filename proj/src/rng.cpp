#include "floquet/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace floquet {

namespace {

// splitmix64 finalizer; full-avalanche 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

double unitarity_defect(const UnitaryMatrix& u) {
    const auto n = u.rows();
    Eigen::MatrixXcd g = u.adjoint() * u;
    g.diagonal().array() -= 1.0;
    (void)n;
    return g.cwiseAbs().maxCoeff();
}

void require_unitary(const UnitaryMatrix& u) {
    if (u.rows() != u.cols() || u.rows() < 1)
        throw std::runtime_error("require_unitary: matrix not square or empty");
    const double defect = unitarity_defect(u);
    const double tol = 1e-10 * static_cast<double>(u.rows());
    if (!(defect <= tol))
        throw std::runtime_error("require_unitary: defect " + std::to_string(defect) +
                                 " exceeds " + std::to_string(tol));
}

std::uint64_t SeedSpec::fold() const {
    // Two dependent mixing rounds over the 128-bit input.
    return mix64(mix64(master_seed) ^ (stream_index + 0xd1b54a32d192ed03ull));
}

SeedSpec derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    return SeedSpec{master_seed, index};
}

StreamRng::StreamRng(SeedSpec seed) {
    const std::uint64_t key = seed.fold();
    // Expand the key into four words; seed_seq scrambles them into the
    // full mt19937_64 state deterministically.
    std::seed_seq seq{
        static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
        static_cast<std::uint32_t>(mix64(key + 1)), static_cast<std::uint32_t>(mix64(key + 1) >> 32),
        static_cast<std::uint32_t>(mix64(key + 2)), static_cast<std::uint32_t>(mix64(key + 2) >> 32),
        static_cast<std::uint32_t>(mix64(key + 3)), static_cast<std::uint32_t>(mix64(key + 3) >> 32)};
    eng_.seed(seq);
}

double StreamRng::uniform01() {
    // 53-bit mantissa, result in (0, 1].
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
}

std::complex<double> StreamRng::gaussian_complex() {
    // Box-Muller; radius scaled so E[|z|^2] = 1 (re, im each N(0, 1/2)).
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    const double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::uint64_t StreamRng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("StreamRng::below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % bound;
}

UnitaryMatrix cue_sample(int dim, SeedSpec seed) {
    if (dim < 1) throw std::invalid_argument("cue_sample: dim must be >= 1");

    StreamRng rng(seed);
    Eigen::MatrixXcd a(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) a(i, j) = rng.gaussian_complex();

    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    UnitaryMatrix u = qr.householderQ();
    const Eigen::MatrixXcd& r = qr.matrixQR();
    for (int j = 0; j < dim; ++j) {
        const std::complex<double> d = r(j, j);
        const double mag = std::abs(d);
        // |d| = 0 has probability zero; fall back to phase 1 for safety.
        const std::complex<double> phase = mag > 0.0 ? d / mag : std::complex<double>(1.0, 0.0);
        u.col(j) *= phase;
    }
    require_unitary(u);
    return u;
}

}  // namespace floquet
