#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace floquet {

// Dense complex square matrix used for gates and Floquet operators.
// Construction sites enforce max|U†U - I| <= 1e-10 * dim (see require_unitary).
using UnitaryMatrix = Eigen::MatrixXcd;

double unitarity_defect(const UnitaryMatrix& u);

// Throws std::runtime_error when the defect exceeds 1e-10 * dim.
void require_unitary(const UnitaryMatrix& u);

// Identifies one reproducible random stream. Equal pairs reproduce identical
// byte streams on any thread count; distinct pairs give statistically
// independent streams (generator state is derived by hashing the pair).
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;

    // Collapses the 128-bit pair to a 64-bit key (two splitmix rounds),
    // usable as the master seed of a nested stream family.
    std::uint64_t fold() const;
};

SeedSpec derive_stream(std::uint64_t master_seed, std::uint64_t index);

// One deterministic stream. mt19937_64 seeded from the hashed (master, stream)
// pair; Gaussians come from an explicit Box-Muller so the variate sequence is
// fixed by the standard's engine output, not by library implementation details.
class StreamRng {
public:
    explicit StreamRng(SeedSpec seed);

    std::uint64_t next_u64() { return eng_(); }
    double uniform01();                       // in (0, 1]
    std::complex<double> gaussian_complex();  // E[z] = 0, E[|z|^2] = 1
    // Fisher-Yates index helper: uniform in {0..bound-1} by rejection.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 eng_;
};

// Haar-distributed unitary: i.i.d. complex Gaussian matrix, QR factorization,
// then each column of Q multiplied by the unit phase of the matching diagonal
// entry of R. Without the phase correction QR output is not Haar.
UnitaryMatrix cue_sample(int dim, SeedSpec seed);

}  // namespace floquet
