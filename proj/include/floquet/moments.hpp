#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "floquet/circuit.hpp"
#include "floquet/weingarten.hpp"

namespace floquet {

// Index pattern of a many-body moment
//   E[ prod_k U_{rows[k], cols[k]} * prod_k conj(U)_{rows_p[k], cols_p[k]} ],
// indices 0-based in {0..N-1}; rows.size() = p (1 for second, 2 for fourth
// moments).
struct CircuitMomentPattern {
    std::vector<std::size_t> rows, cols, rows_p, cols_p;
};

// One embedded gate of the averaged channel: `offsets` maps the local
// operator's index c to its flat-index offset, `bases` lists the flat indices
// with all gate digits zero. The averaged kernel is the exact Haar moment of
// the gate's CUE(offsets.size()) factor.
struct ChannelFactor {
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> bases;
};

// Exact E[U (x) conj(U)] of an ensemble, composed gate-by-gate from per-gate
// p = 1 Haar kernels delta_{aa'} delta_{bb'} / d. Matrix-free up to N = 64;
// dense form up to N = 16. Fixes the vectorized identity (sum over b of basis
// (b,b)) exactly.
class MomentChannel2 {
  public:
    static MomentChannel2 for_circuit(const CircuitSpec& spec);
    static MomentChannel2 for_noninteracting(int q, int linear_size);

    std::size_t dim() const { return n_; }
    // x indexed by i*N + i' (replica, conjugate replica).
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    // Entry ((i,i'), (j,j')) = E[U_{ij} conj(U)_{i'j'}]; requires N <= 16.
    Eigen::MatrixXcd dense() const;

  private:
    std::size_t n_ = 0;
    std::vector<ChannelFactor> factors_;  // listed in gate_order; applied in reverse
    friend class MomentChannel4;
};

// Exact E[U (x) U (x) conj(U) (x) conj(U)], matrix-free on N^4 coefficient
// vectors (N <= 16), with per-gate p = 2 Haar kernels using the exact
// finite-dimension Weingarten values of each gate factor.
class MomentChannel4 {
  public:
    static MomentChannel4 for_circuit(const CircuitSpec& spec);
    static MomentChannel4 for_noninteracting(int q, int linear_size);

    std::size_t dim() const { return n_; }
    // x indexed by ((i1*N + i2)*N + i1')*N + i2'.
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

  private:
    std::size_t n_ = 0;
    std::vector<ChannelFactor> factors_;
};

// Dense exact second moment E[U_{ij} conj(U)_{i'j'}] as an N^2 x N^2 matrix
// with row (i,i') and column (j,j'); N <= 16.
Eigen::MatrixXcd second_moment_exact(const CircuitSpec& spec);

// Exact fourth moment at the given p = 2 pattern via the matrix-free channel
// applied to the column-selected basis vector; N <= 16. Exact at finite q.
std::complex<double> fourth_moment_exact(const CircuitSpec& spec,
                                         const CircuitMomentPattern& pattern);

// <|Tr U|^2> = trace of the second-moment channel; exactly 1 for every valid
// member of either ensemble family.
double sff2_from_channel(const MomentChannel2& channel);
double sff2_from_channel(const CircuitSpec& spec);

// Monte Carlo estimate of the order-2 or order-4 moment at `pattern` over
// circuit realizations; n_samples >= 2.
McEstimate moment_mc(const CircuitSpec& spec, const CircuitMomentPattern& pattern, int order,
                     std::size_t n_samples, SeedSpec seed);

}  // namespace floquet
