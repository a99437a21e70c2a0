#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "floquet/perm.hpp"
#include "floquet/rational.hpp"
#include "floquet/rng.hpp"

namespace floquet {

// Exact Weingarten values V^(p)_{c1..cm} of U(q) for all partitions of every
// p <= max_p, solved level by level from the two recursion relations.
struct WeingartenTable {
    int q = 0;
    int max_p = 0;
    std::map<CycleType, BigRational> values;
};

// Builds the table. Level p+1 unknowns satisfy one equation per partition of p
// (the level-raising recursion, with the known level-p value on the right) and
// one equation per (partition of p+1, distinct part value >= 2) from the
// within-level recursion. The full redundant rational system is solved by
// elimination; rank must equal the unknown count and every generated equation
// must have zero residual, else an internal invariant failure is thrown.
// Valid only for max_p <= q.
WeingartenTable solve_table(int q, int max_p);

// Lookup; part order irrelevant (CycleType::of canonicalizes).
const BigRational& wg(const WeingartenTable& table, const CycleType& ct);

// Index pattern of the Haar moment
//   < U_{i1 j1} .. U_{ip jp} U†_{j'1 i'1} .. U†_{j'p i'p} >,
// all index values 1-based in {1..q}.
struct MomentPattern {
    int p = 0;
    std::vector<int> rows, cols;      // i_k, j_k
    std::vector<int> rows_p, cols_p;  // i'_k, j'_k
};

// Exact moment: sum over sigma, tau in S_p of Wg(tau^-1 sigma) times the
// surviving Kronecker products prod_k delta(i_k, i'_sigma(k)) delta(j_k, j'_tau(k)).
// Permutations are delta-filtered per index side before the double sum.
BigRational haar_moment(const WeingartenTable& table, const MomentPattern& pat);

struct McEstimate {
    std::complex<double> mean{0.0, 0.0};
    double std_error = 0.0;  // sqrt(unbiased complex sample variance / n)
    std::size_t n_samples = 0;
};

// Monte Carlo estimate of the same moment over cue_sample(q) draws.
McEstimate haar_moment_mc(int q, const MomentPattern& pat, std::size_t n_samples, SeedSpec seed);

struct ScaledWg {
    int q;
    double scaled;  // q^(2p - m) * Wg(ct; q)
};

// Large-q scaling check: the leading order of Wg on cycle type ct (p total,
// m parts) is proportional to q^(m-2p), so the scaled values converge to a
// finite nonzero constant; for ct = [1,..,1] the limit is 1 with O(q^-2) residual.
std::vector<ScaledWg> asymptotic_check(const CycleType& ct, const std::vector<int>& q_list);

// Re-evaluates both defining recursions on a finished table and reports
// whether every equation holds with exactly zero rational residual.
bool recursions_hold(const WeingartenTable& table);

// Versioned text format:
//   wg-table v1 q=<q> max_p=<p>
//   <parts joined by comma> <numerator>/<denominator>
// one line per partition, levels ascending, partitions in canonical
// (reverse-lexicographic) order within each level.
void write_table(std::ostream& os, const WeingartenTable& table);
WeingartenTable read_table(std::istream& is);

}  // namespace floquet
