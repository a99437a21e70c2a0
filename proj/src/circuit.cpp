#include "floquet/circuit.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace floquet {

namespace {

constexpr std::size_t kDenseCeiling = 4096;

// base^exp, saturating just above `cap` so callers can range-check without
// overflow.
std::size_t pow_capped(std::size_t base, std::size_t exp, std::size_t cap) {
    std::size_t r = 1;
    for (std::size_t e = 0; e < exp; ++e) {
        if (r > cap / base) return cap + 1;
        r *= base;
    }
    return r;
}

std::size_t n_sites_of(int dimension, int linear_size) {
    return pow_capped(static_cast<std::size_t>(linear_size),
                      static_cast<std::size_t>(dimension), kDenseCeiling);
}

struct RawBond {
    LatticeSite a;
    LatticeSite b;
    LatticeSite from;  // site whose +e_axis step reaches the partner
    int axis = 0;
};

std::vector<RawBond> enumerate_raw_bonds(int dimension, int linear_size, Boundary boundary) {
    std::vector<RawBond> out;
    for (const LatticeSite& s : lattice_sites(dimension, linear_size)) {
        for (int k = 0; k < dimension; ++k) {
            if (s.coords[static_cast<std::size_t>(k)] < linear_size) {
                LatticeSite t = s;
                t.coords[static_cast<std::size_t>(k)] += 1;
                out.push_back(RawBond{s, t, s, k});
            } else if (boundary == Boundary::periodic) {
                LatticeSite t = s;
                t.coords[static_cast<std::size_t>(k)] = 1;
                out.push_back(RawBond{t, s, s, k});  // canonical orientation t < s
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const RawBond& x, const RawBond& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    return out;
}

using SitePair = std::pair<LatticeSite, LatticeSite>;

SitePair unordered_pair(const LatticeSite& x, const LatticeSite& y) {
    return x < y ? SitePair{x, y} : SitePair{y, x};
}

// u <- (embedded gate) * u, gate row/col index = digit_a * q + digit_b.
void apply_embedded_gate(UnitaryMatrix& u, const UnitaryMatrix& g, std::size_t stride_a,
                         std::size_t stride_b, std::size_t q) {
    const std::size_t q2 = q * q;
    const std::size_t n = static_cast<std::size_t>(u.rows());
    std::vector<std::size_t> offset(q2);
    for (std::size_t ia = 0; ia < q; ++ia)
        for (std::size_t ib = 0; ib < q; ++ib) offset[ia * q + ib] = ia * stride_a + ib * stride_b;

    Eigen::VectorXcd in(static_cast<Eigen::Index>(q2));
    for (std::size_t base : embedding_bases(n, {stride_a, stride_b}, static_cast<int>(q))) {
        for (Eigen::Index c = 0; c < u.cols(); ++c) {
            for (std::size_t k = 0; k < q2; ++k)
                in(static_cast<Eigen::Index>(k)) =
                    u(static_cast<Eigen::Index>(base + offset[k]), c);
            const Eigen::VectorXcd out = g * in;
            for (std::size_t k = 0; k < q2; ++k)
                u(static_cast<Eigen::Index>(base + offset[k]), c) =
                    out(static_cast<Eigen::Index>(k));
        }
    }
}

std::map<LatticeSite, std::size_t> site_ranks(int dimension, int linear_size) {
    std::map<LatticeSite, std::size_t> ranks;
    std::size_t r = 0;
    for (const LatticeSite& s : lattice_sites(dimension, linear_size)) ranks[s] = r++;
    return ranks;
}

// Canonical rank of each bond: position after sorting site pairs
// lexicographically. Gate seeds key off this rank so that gate randomness is
// attached to the physical bond, not to its position in spec.bonds.
std::vector<std::size_t> canonical_bond_ranks(const CircuitSpec& spec) {
    std::vector<std::size_t> order(spec.bonds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return unordered_pair(spec.bonds[x].a, spec.bonds[x].b) <
               unordered_pair(spec.bonds[y].a, spec.bonds[y].b);
    });
    std::vector<std::size_t> rank(spec.bonds.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    return rank;
}

UnitaryMatrix kron(const UnitaryMatrix& x, const UnitaryMatrix& y) {
    UnitaryMatrix r(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            r.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return r;
}

}  // namespace

std::string to_string(const LatticeSite& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.coords.size(); ++i) {
        if (i) os << ',';
        os << s.coords[i];
    }
    os << ')';
    return os.str();
}

std::string to_string(const Bond& b) {
    return to_string(b.a) + "-" + to_string(b.b) + "@s" + std::to_string(b.substep);
}

std::vector<LatticeSite> lattice_sites(int dimension, int linear_size) {
    if (dimension < 1 || linear_size < 1)
        throw std::invalid_argument("lattice_sites: need dimension >= 1, linear_size >= 1");
    std::vector<LatticeSite> out;
    LatticeSite cur;
    cur.coords.assign(static_cast<std::size_t>(dimension), 1);
    for (;;) {
        out.push_back(cur);
        int k = dimension - 1;
        while (k >= 0 && cur.coords[static_cast<std::size_t>(k)] == linear_size) {
            cur.coords[static_cast<std::size_t>(k)] = 1;
            --k;
        }
        if (k < 0) break;
        cur.coords[static_cast<std::size_t>(k)] += 1;
    }
    return out;
}

std::size_t encode_index(const ManyBodyIndex& idx, int q) {
    if (q < 2) throw std::invalid_argument("encode_index: q must be >= 2");
    std::size_t flat = 0;
    for (int d : idx.digits) {
        if (d < 0 || d >= q) throw std::invalid_argument("encode_index: digit outside {0..q-1}");
        flat = flat * static_cast<std::size_t>(q) + static_cast<std::size_t>(d);
    }
    return flat;
}

ManyBodyIndex decode_index(std::size_t flat, int q, std::size_t n_sites) {
    if (q < 2) throw std::invalid_argument("decode_index: q must be >= 2");
    ManyBodyIndex idx;
    idx.digits.assign(n_sites, 0);
    for (std::size_t r = n_sites; r-- > 0;) {
        idx.digits[r] = static_cast<int>(flat % static_cast<std::size_t>(q));
        flat /= static_cast<std::size_t>(q);
    }
    if (flat != 0) throw std::invalid_argument("decode_index: flat index out of range");
    return idx;
}

std::vector<std::size_t> site_strides(int dimension, int linear_size, int q) {
    if (q < 2) throw std::invalid_argument("site_strides: q must be >= 2");
    const std::size_t sites = n_sites_of(dimension, linear_size);
    std::vector<std::size_t> strides(sites);
    std::size_t st = 1;
    for (std::size_t r = sites; r-- > 0;) {
        strides[r] = st;
        st *= static_cast<std::size_t>(q);
    }
    return strides;
}

std::vector<std::size_t> embedding_bases(std::size_t n, const std::vector<std::size_t>& strides,
                                         int q) {
    std::vector<std::size_t> bases;
    for (std::size_t f = 0; f < n; ++f) {
        bool zero = true;
        for (std::size_t st : strides)
            if ((f / st) % static_cast<std::size_t>(q) != 0) {
                zero = false;
                break;
            }
        if (zero) bases.push_back(f);
    }
    return bases;
}

std::size_t hilbert_dim(const CircuitSpec& spec) {
    const std::size_t sites = n_sites_of(spec.dimension, spec.linear_size);
    const std::size_t n =
        pow_capped(static_cast<std::size_t>(spec.local_dim), sites, kDenseCeiling);
    if (n > kDenseCeiling)
        throw std::length_error("hilbert_dim: q^(L^D) exceeds the dense ceiling of 4096");
    return n;
}

std::vector<std::string> validate(const CircuitSpec& spec) {
    std::vector<std::string> out;
    if (spec.dimension < 1) out.push_back("dimension must be >= 1");
    if (spec.linear_size < 2) out.push_back("linear_size must be >= 2");
    if (spec.local_dim < 2) out.push_back("local_dim must be >= 2");
    if (!out.empty()) return out;  // lattice geometry below assumes sane parameters

    const int D = spec.dimension;
    const int L = spec.linear_size;
    const bool periodic = spec.boundary == Boundary::periodic;

    auto in_range = [&](const LatticeSite& s) {
        if (static_cast<int>(s.coords.size()) != D) return false;
        for (int c : s.coords)
            if (c < 1 || c > L) return false;
        return true;
    };
    auto neighbors = [&](const LatticeSite& x, const LatticeSite& y) {
        int diff_axes = 0;
        bool step = false;
        for (int k = 0; k < D; ++k) {
            const int dx = std::abs(x.coords[static_cast<std::size_t>(k)] -
                                    y.coords[static_cast<std::size_t>(k)]);
            if (dx == 0) continue;
            ++diff_axes;
            step = dx == 1 || (periodic && dx == L - 1);
        }
        return diff_axes == 1 && step;
    };

    bool geometry_ok = true;
    for (const Bond& b : spec.bonds) {
        if (!in_range(b.a) || !in_range(b.b)) {
            out.push_back("bond " + to_string(b) + ": site coordinates outside the lattice");
            geometry_ok = false;
            continue;
        }
        if (!neighbors(b.a, b.b)) {
            out.push_back("bond " + to_string(b) + ": sites are not nearest neighbors");
            geometry_ok = false;
        }
        if (b.substep < 1) out.push_back("bond " + to_string(b) + ": substep must be >= 1");
    }

    if (geometry_ok) {
        std::set<SitePair> expected;
        for (const RawBond& rb : enumerate_raw_bonds(D, L, spec.boundary))
            expected.insert(unordered_pair(rb.a, rb.b));
        std::map<SitePair, int> seen;
        for (const Bond& b : spec.bonds) seen[unordered_pair(b.a, b.b)] += 1;
        for (const auto& [pair, count] : seen)
            if (count > 1)
                out.push_back("bond " + to_string(pair.first) + "-" + to_string(pair.second) +
                              " listed " + std::to_string(count) + " times");
        for (const auto& pair : expected)
            if (!seen.count(pair))
                out.push_back("missing bond " + to_string(pair.first) + "-" +
                              to_string(pair.second));

        std::map<LatticeSite, std::set<int>> site_substeps;
        for (const Bond& b : spec.bonds) {
            for (const LatticeSite* s : {&b.a, &b.b}) {
                if (!site_substeps[*s].insert(b.substep).second)
                    out.push_back("site " + to_string(*s) +
                                  " has two incident bonds at substep " +
                                  std::to_string(b.substep));
            }
        }
    }

    if (spec.gate_order.size() != spec.bonds.size()) {
        out.push_back("gate_order has " + std::to_string(spec.gate_order.size()) +
                      " entries for " + std::to_string(spec.bonds.size()) + " bonds");
    } else {
        std::vector<bool> hit(spec.bonds.size(), false);
        bool indices_ok = true;
        for (std::size_t g : spec.gate_order) {
            if (g >= spec.bonds.size() || hit[g]) {
                out.push_back("gate_order is not a permutation of the bond indices");
                indices_ok = false;
                break;
            }
            hit[g] = true;
        }
        if (indices_ok) {
            for (std::size_t i = 0; i + 1 < spec.gate_order.size(); ++i) {
                const Bond& x = spec.bonds[spec.gate_order[i]];
                const Bond& y = spec.bonds[spec.gate_order[i + 1]];
                if (x.substep > y.substep) {
                    out.push_back("gate_order not grouped by substep: " + to_string(x) +
                                  " precedes " + to_string(y));
                    break;
                }
            }
        }
    }
    return out;
}

CircuitSpec standard_orderings(OrderingKind kind, int dimension, int linear_size, int q,
                               Boundary boundary, SeedSpec seed) {
    if (dimension < 1 || linear_size < 2 || q < 2)
        throw std::invalid_argument("standard_orderings: need D >= 1, L >= 2, q >= 2");
    if (boundary == Boundary::periodic && linear_size < 3)
        throw std::invalid_argument(
            "standard_orderings: periodic boundary needs L >= 3 (wraparound pair would "
            "duplicate the interior pair at L = 2)");
    if (kind == OrderingKind::staircase && dimension != 1)
        throw std::invalid_argument("standard_orderings: staircase ordering is one-dimensional");
    if (kind == OrderingKind::brickwork && boundary == Boundary::periodic && linear_size % 2 != 0)
        throw std::invalid_argument(
            "standard_orderings: brickwork with periodic boundary requires even L");

    CircuitSpec spec;
    spec.dimension = dimension;
    spec.linear_size = linear_size;
    spec.local_dim = q;
    spec.boundary = boundary;

    const std::vector<RawBond> raw = enumerate_raw_bonds(dimension, linear_size, boundary);
    const std::size_t m = raw.size();
    std::vector<std::size_t> tiebreak(m);  // secondary sort key within a substep
    std::iota(tiebreak.begin(), tiebreak.end(), std::size_t{0});

    spec.bonds.reserve(m);
    for (const RawBond& rb : raw) spec.bonds.push_back(Bond{rb.a, rb.b, 0});

    switch (kind) {
        case OrderingKind::brickwork:
            for (std::size_t i = 0; i < m; ++i) {
                const RawBond& rb = raw[i];
                const int c = rb.from.coords[static_cast<std::size_t>(rb.axis)];
                spec.bonds[i].substep = 2 * rb.axis + (c % 2 == 1 ? 1 : 2);
            }
            break;
        case OrderingKind::staircase:
            for (std::size_t i = 0; i < m; ++i)
                spec.bonds[i].substep = raw[i].from.coords[0];
            break;
        case OrderingKind::random: {
            StreamRng rng(seed);
            std::vector<std::size_t> shuffled(m);
            std::iota(shuffled.begin(), shuffled.end(), std::size_t{0});
            for (std::size_t i = m; i > 1; --i)
                std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
            // First-fit substeps in shuffled processing order; greedy
            // assignment against already-colored site-sharing bonds always
            // terminates, so no retry is needed.
            for (std::size_t pos = 0; pos < m; ++pos) {
                const std::size_t i = shuffled[pos];
                std::set<int> used;
                for (std::size_t j : shuffled) {
                    if (j == i) break;
                    const bool shares = spec.bonds[j].a == spec.bonds[i].a ||
                                        spec.bonds[j].a == spec.bonds[i].b ||
                                        spec.bonds[j].b == spec.bonds[i].a ||
                                        spec.bonds[j].b == spec.bonds[i].b;
                    if (shares) used.insert(spec.bonds[j].substep);
                }
                int s = 1;
                while (used.count(s)) ++s;
                spec.bonds[i].substep = s;
                tiebreak[i] = pos;
            }
            break;
        }
    }

    spec.gate_order.resize(m);
    std::iota(spec.gate_order.begin(), spec.gate_order.end(), std::size_t{0});
    std::sort(spec.gate_order.begin(), spec.gate_order.end(), [&](std::size_t x, std::size_t y) {
        return std::tie(spec.bonds[x].substep, tiebreak[x]) <
               std::tie(spec.bonds[y].substep, tiebreak[y]);
    });

    const std::vector<std::string> violations = validate(spec);
    if (!violations.empty())
        throw std::logic_error("standard_orderings: produced invalid spec: " + violations.front());
    return spec;
}

std::vector<UnitaryMatrix> sample_bond_gates(const CircuitSpec& spec, SeedSpec seed) {
    const int q = spec.local_dim;
    const std::vector<std::size_t> ranks = canonical_bond_ranks(spec);
    const std::uint64_t key = seed.fold();
    std::vector<UnitaryMatrix> gates(spec.bonds.size());
    for (std::size_t i = 0; i < spec.bonds.size(); ++i)
        gates[i] = cue_sample(static_cast<std::size_t>(q) * static_cast<std::size_t>(q),
                              derive_stream(key, ranks[i]));
    return gates;
}

UnitaryMatrix build_floquet_from_gates(const CircuitSpec& spec,
                                       const std::vector<UnitaryMatrix>& gates) {
    const std::vector<std::string> violations = validate(spec);
    if (!violations.empty())
        throw std::invalid_argument("build_floquet: invalid spec: " + violations.front());
    if (gates.size() != spec.bonds.size())
        throw std::invalid_argument("build_floquet: one gate per bond required");

    const std::size_t n = hilbert_dim(spec);
    const std::size_t q = static_cast<std::size_t>(spec.local_dim);
    const std::size_t q2 = q * q;
    for (const UnitaryMatrix& g : gates)
        if (static_cast<std::size_t>(g.rows()) != q2 || static_cast<std::size_t>(g.cols()) != q2)
            throw std::invalid_argument("build_floquet: gate dimension must be q^2");

    const std::map<LatticeSite, std::size_t> ranks = site_ranks(spec.dimension, spec.linear_size);
    const std::vector<std::size_t> strides =
        site_strides(spec.dimension, spec.linear_size, spec.local_dim);
    auto stride_of = [&](const LatticeSite& s) { return strides[ranks.at(s)]; };

    UnitaryMatrix u = UnitaryMatrix::Identity(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    // gate_order lists factors left to right; build right factor inward, so
    // the last entry is applied to u first.
    for (std::size_t k = spec.gate_order.size(); k-- > 0;) {
        const std::size_t i = spec.gate_order[k];
        apply_embedded_gate(u, gates[i], stride_of(spec.bonds[i].a), stride_of(spec.bonds[i].b),
                            q);
    }
    return u;
}

UnitaryMatrix build_floquet(const CircuitSpec& spec, SeedSpec seed) {
    UnitaryMatrix u = build_floquet_from_gates(spec, sample_bond_gates(spec, seed));
    if (u.rows() <= 512) require_unitary(u);
    return u;
}

NoninteractingModel build_noninteracting(int q, int linear_size, SeedSpec seed) {
    if (q < 2 || linear_size < 1)
        throw std::invalid_argument("build_noninteracting: need q >= 2, L >= 1");
    const std::size_t n = pow_capped(static_cast<std::size_t>(q),
                                     static_cast<std::size_t>(linear_size), kDenseCeiling);
    if (n > kDenseCeiling)
        throw std::length_error("build_noninteracting: q^L exceeds the dense ceiling of 4096");

    NoninteractingModel model;
    const std::uint64_t key = seed.fold();
    model.factors.reserve(static_cast<std::size_t>(linear_size));
    for (int site = 0; site < linear_size; ++site)
        model.factors.push_back(
            cue_sample(static_cast<std::size_t>(q), derive_stream(key, static_cast<std::size_t>(site))));

    model.u = model.factors.front();
    for (std::size_t i = 1; i < model.factors.size(); ++i) model.u = kron(model.u, model.factors[i]);
    if (model.u.rows() <= 512) require_unitary(model.u);
    return model;
}

}  // namespace floquet
