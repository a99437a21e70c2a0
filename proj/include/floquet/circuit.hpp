#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "floquet/rng.hpp"

namespace floquet {

// Site on a D-dimensional lattice of linear size L; coords are 1-based.
// Canonical site order is lexicographic on coords, and the flat many-body
// index is mixed-radix big-endian in that order (first site most significant).
struct LatticeSite {
    std::vector<int> coords;
    auto operator<=>(const LatticeSite&) const = default;
};

std::string to_string(const LatticeSite& s);

// Nearest-neighbor bond with its time substep. Builders store the pair in
// canonical orientation (a < b lexicographically); `a` supplies the more
// significant of the two gate digits.
struct Bond {
    LatticeSite a;
    LatticeSite b;
    int substep = 0;
};

std::string to_string(const Bond& b);

enum class Boundary { open, periodic };
enum class OrderingKind { brickwork, staircase, random };

// A member of the circuit family up to gate randomness.
//
// `bonds` must cover every nearest-neighbor pair exactly once (wraparound
// pairs iff periodic) and all bonds incident to a common site must carry
// pairwise distinct substeps, which makes bonds of equal substep site-disjoint
// and hence commuting. `gate_order` is a total order on bond indices listing
// factors of the Floquet product left to right; the LAST entry acts FIRST on
// states, and substeps must be non-decreasing along the list so that the total
// order refines the substep grouping.
struct CircuitSpec {
    int dimension = 1;
    int linear_size = 2;
    int local_dim = 2;
    Boundary boundary = Boundary::open;
    std::vector<Bond> bonds;
    std::vector<std::size_t> gate_order;
};

// All sites of the (D, L) lattice in canonical (lexicographic) order.
std::vector<LatticeSite> lattice_sites(int dimension, int linear_size);

// Digits of the many-body basis label, one per site in canonical site order,
// each in {0..q-1}.
struct ManyBodyIndex {
    std::vector<int> digits;
};

std::size_t encode_index(const ManyBodyIndex& idx, int q);
ManyBodyIndex decode_index(std::size_t flat, int q, std::size_t n_sites);

// Stride of each site's digit in the flat index, canonical site order
// (big-endian: stride of site rank r is q^(n_sites-1-r)).
std::vector<std::size_t> site_strides(int dimension, int linear_size, int q);

// Flat indices whose digits vanish at all the given strides — the base points
// for embedding a local operator on those sites.
std::vector<std::size_t> embedding_bases(std::size_t n, const std::vector<std::size_t>& strides,
                                         int q);

// Hilbert-space dimension q^(L^D); throws std::length_error above the dense
// ceiling of 4096.
std::size_t hilbert_dim(const CircuitSpec& spec);

// Checks every CircuitSpec invariant and returns one message per violation
// (empty means valid). Violations are data, not errors.
std::vector<std::string> validate(const CircuitSpec& spec);

// Constructs the named ordering on the (D, L) lattice.
//
//   brickwork: along axis k the bond whose from-site has odd coordinate gets
//     substep 2k+1, even gets 2k+2 ("from-site" = the site whose +e_k step
//     reaches the partner, including wraparound). Periodic boundary requires
//     even L.
//   staircase: D=1 only; bond (n, n+1) gets substep n (wraparound bond gets
//     substep L).
//   random: uniformly random permutation of the bonds with substeps assigned
//     first-fit subject to the site-disjointness constraint.
//
// gate_order lists bond indices sorted by ascending substep (ties by canonical
// bond order, or by shuffle position for `random`). Periodic boundary requires
// L >= 3 (at L = 2 the wraparound pair duplicates the interior pair).
// `seed` is consumed only by `random`.
CircuitSpec standard_orderings(OrderingKind kind, int dimension, int linear_size, int q,
                               Boundary boundary, SeedSpec seed);

// One independent CUE(q^2) gate per bond. The gate stream index is the bond's
// canonical rank (position after sorting pairs lexicographically), so a given
// master seed yields the same gate on the same physical bond under any
// gate_order.
std::vector<UnitaryMatrix> sample_bond_gates(const CircuitSpec& spec, SeedSpec seed);

// Assembles the dense Floquet operator from caller-supplied per-bond gates
// (gates[i] belongs to spec.bonds[i]); test hook for identity gates and the
// deterministic channel builders.
UnitaryMatrix build_floquet_from_gates(const CircuitSpec& spec,
                                       const std::vector<UnitaryMatrix>& gates);

// Samples gates and assembles the Floquet operator; factors multiply in
// gate_order with the last entry acting first on states. Pure given seed.
UnitaryMatrix build_floquet(const CircuitSpec& spec, SeedSpec seed);

// Tensor product of L independent CUE(q) single-site matrices, with the
// factors exposed for product-law tests. Requires q^L <= 4096.
struct NoninteractingModel {
    UnitaryMatrix u;
    std::vector<UnitaryMatrix> factors;
};

NoninteractingModel build_noninteracting(int q, int linear_size, SeedSpec seed);

}  // namespace floquet
