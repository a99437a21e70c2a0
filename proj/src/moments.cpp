#include "floquet/moments.hpp"

#include <map>
#include <stdexcept>

#include "floquet/parallel.hpp"

namespace floquet {

namespace {

std::map<LatticeSite, std::size_t> site_rank_map(int dimension, int linear_size) {
    std::map<LatticeSite, std::size_t> ranks;
    std::size_t r = 0;
    for (const LatticeSite& s : lattice_sites(dimension, linear_size)) ranks[s] = r++;
    return ranks;
}

// One factor per bond, listed in gate_order (leftmost product factor first).
std::vector<ChannelFactor> circuit_factors(const CircuitSpec& spec, std::size_t n) {
    const std::vector<std::string> violations = validate(spec);
    if (!violations.empty())
        throw std::invalid_argument("moment channel: invalid spec: " + violations.front());

    const int q = spec.local_dim;
    const std::map<LatticeSite, std::size_t> ranks =
        site_rank_map(spec.dimension, spec.linear_size);
    const std::vector<std::size_t> strides =
        site_strides(spec.dimension, spec.linear_size, q);

    std::vector<ChannelFactor> factors;
    factors.reserve(spec.gate_order.size());
    for (std::size_t idx : spec.gate_order) {
        const Bond& bond = spec.bonds[idx];
        const std::size_t sa = strides[ranks.at(bond.a)];
        const std::size_t sb = strides[ranks.at(bond.b)];
        ChannelFactor f;
        f.offsets.resize(static_cast<std::size_t>(q) * static_cast<std::size_t>(q));
        for (int da = 0; da < q; ++da)
            for (int db = 0; db < q; ++db)
                f.offsets[static_cast<std::size_t>(da * q + db)] =
                    static_cast<std::size_t>(da) * sa + static_cast<std::size_t>(db) * sb;
        f.bases = embedding_bases(n, {sa, sb}, q);
        factors.push_back(std::move(f));
    }
    return factors;
}

// One factor per site; all factors commute (disjoint sites), site order used.
std::vector<ChannelFactor> site_factors(int q, int linear_size, std::size_t n) {
    if (q < 2 || linear_size < 1)
        throw std::invalid_argument("moment channel: need q >= 2, L >= 1");
    std::vector<std::size_t> strides(static_cast<std::size_t>(linear_size));
    std::size_t st = 1;
    for (std::size_t r = strides.size(); r-- > 0;) {
        strides[r] = st;
        st *= static_cast<std::size_t>(q);
    }
    std::vector<ChannelFactor> factors;
    factors.reserve(strides.size());
    for (std::size_t stride : strides) {
        ChannelFactor f;
        f.offsets.resize(static_cast<std::size_t>(q));
        for (int c = 0; c < q; ++c)
            f.offsets[static_cast<std::size_t>(c)] = static_cast<std::size_t>(c) * stride;
        f.bases = embedding_bases(n, {stride}, q);
        factors.push_back(std::move(f));
    }
    return factors;
}

// out[(i,i')] = delta_{aa'}/d * sum_b x[(j_b, j'_b)] on the gate digits,
// identity on the rest.
Eigen::VectorXcd apply_factor2(const Eigen::VectorXcd& x, const ChannelFactor& f,
                               std::size_t n) {
    const std::size_t d = f.offsets.size();
    Eigen::VectorXcd out(x.size());
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t base_r : f.bases) {
        for (std::size_t base_c : f.bases) {
            std::complex<double> s{0.0, 0.0};
            for (std::size_t b = 0; b < d; ++b)
                s += x(static_cast<Eigen::Index>((base_r + f.offsets[b]) * n + base_c +
                                                 f.offsets[b]));
            s *= inv_d;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t ap = 0; ap < d; ++ap)
                    out(static_cast<Eigen::Index>((base_r + f.offsets[a]) * n + base_c +
                                                  f.offsets[ap])) =
                        a == ap ? s : std::complex<double>{0.0, 0.0};
        }
    }
    return out;
}

// Exact p = 2 Weingarten values of CUE(d), fetched from the rational solver.
struct Wg2 {
    double same;  // Wg of cycle type [1,1]
    double cross;  // Wg of cycle type [2]
};

Wg2 wg2_of(std::size_t d) {
    static std::map<std::size_t, Wg2> cache;
    const auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    const WeingartenTable table = solve_table(static_cast<int>(d), 2);
    const Wg2 w{to_double(wg(table, CycleType::of({1, 1}))),
                to_double(wg(table, CycleType::of({2})))};
    cache[d] = w;
    return w;
}

std::size_t flat4(std::size_t f1, std::size_t f2, std::size_t f3, std::size_t f4,
                  std::size_t n) {
    return ((f1 * n + f2) * n + f3) * n + f4;
}

// Exact p = 2 Haar kernel on the gate digits: row pairings sigma in S_2 match
// (a1,a2) against (a1',a2'), column pairings tau produce the two gathered
// sums, weighted by Wg(sigma tau^{-1}).
Eigen::VectorXcd apply_factor4(const Eigen::VectorXcd& x, const ChannelFactor& f,
                               std::size_t n) {
    const std::size_t d = f.offsets.size();
    const Wg2 w = wg2_of(d);
    Eigen::VectorXcd out(x.size());
    for (std::size_t b1 : f.bases)
        for (std::size_t b2 : f.bases)
            for (std::size_t b1p : f.bases)
                for (std::size_t b2p : f.bases) {
                    std::complex<double> s_id{0.0, 0.0}, s_sw{0.0, 0.0};
                    for (std::size_t c1 = 0; c1 < d; ++c1)
                        for (std::size_t c2 = 0; c2 < d; ++c2) {
                            const std::size_t r1 = b1 + f.offsets[c1];
                            const std::size_t r2 = b2 + f.offsets[c2];
                            s_id += x(static_cast<Eigen::Index>(
                                flat4(r1, r2, b1p + f.offsets[c1], b2p + f.offsets[c2], n)));
                            s_sw += x(static_cast<Eigen::Index>(
                                flat4(r1, r2, b1p + f.offsets[c2], b2p + f.offsets[c1], n)));
                        }
                    const std::complex<double> rows_id = w.same * s_id + w.cross * s_sw;
                    const std::complex<double> rows_sw = w.cross * s_id + w.same * s_sw;
                    for (std::size_t a1 = 0; a1 < d; ++a1)
                        for (std::size_t a2 = 0; a2 < d; ++a2)
                            for (std::size_t a1p = 0; a1p < d; ++a1p)
                                for (std::size_t a2p = 0; a2p < d; ++a2p)
                                    out(static_cast<Eigen::Index>(
                                        flat4(b1 + f.offsets[a1], b2 + f.offsets[a2],
                                              b1p + f.offsets[a1p], b2p + f.offsets[a2p], n))) =
                                        std::complex<double>{0.0, 0.0};
                    for (std::size_t a1 = 0; a1 < d; ++a1)
                        for (std::size_t a2 = 0; a2 < d; ++a2) {
                            out(static_cast<Eigen::Index>(
                                flat4(b1 + f.offsets[a1], b2 + f.offsets[a2],
                                      b1p + f.offsets[a1], b2p + f.offsets[a2], n))) += rows_id;
                            out(static_cast<Eigen::Index>(
                                flat4(b1 + f.offsets[a1], b2 + f.offsets[a2],
                                      b1p + f.offsets[a2], b2p + f.offsets[a1], n))) += rows_sw;
                        }
                }
    return out;
}

void check_pattern(const CircuitMomentPattern& pat, std::size_t p, std::size_t n) {
    if (pat.rows.size() != p || pat.cols.size() != p || pat.rows_p.size() != p ||
        pat.cols_p.size() != p)
        throw std::invalid_argument("moment pattern: all four index lists must have length p");
    for (const std::vector<std::size_t>* v : {&pat.rows, &pat.cols, &pat.rows_p, &pat.cols_p})
        for (std::size_t i : *v)
            if (i >= n) throw std::invalid_argument("moment pattern: index outside {0..N-1}");
}

}  // namespace

MomentChannel2 MomentChannel2::for_circuit(const CircuitSpec& spec) {
    MomentChannel2 c;
    c.n_ = hilbert_dim(spec);
    if (c.n_ > 64)
        throw std::length_error("MomentChannel2: matrix-free second moment needs N <= 64");
    c.factors_ = circuit_factors(spec, c.n_);
    return c;
}

MomentChannel2 MomentChannel2::for_noninteracting(int q, int linear_size) {
    MomentChannel2 c;
    c.n_ = 1;
    for (int i = 0; i < linear_size; ++i) {
        c.n_ *= static_cast<std::size_t>(q);
        if (c.n_ > 64)
            throw std::length_error("MomentChannel2: matrix-free second moment needs N <= 64");
    }
    c.factors_ = site_factors(q, linear_size, c.n_);
    return c;
}

Eigen::VectorXcd MomentChannel2::apply(const Eigen::VectorXcd& x) const {
    if (static_cast<std::size_t>(x.size()) != n_ * n_)
        throw std::invalid_argument("MomentChannel2: vector length must be N^2");
    Eigen::VectorXcd cur = x;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it)
        cur = apply_factor2(cur, *it, n_);
    return cur;
}

Eigen::MatrixXcd MomentChannel2::dense() const {
    if (n_ > 16) throw std::length_error("MomentChannel2: dense form needs N <= 16");
    const std::size_t n2 = n_ * n_;
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(n2), static_cast<Eigen::Index>(n2));
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n2));
    for (std::size_t col = 0; col < n2; ++col) {
        e(static_cast<Eigen::Index>(col)) = 1.0;
        m.col(static_cast<Eigen::Index>(col)) = apply(e);
        e(static_cast<Eigen::Index>(col)) = 0.0;
    }
    return m;
}

MomentChannel4 MomentChannel4::for_circuit(const CircuitSpec& spec) {
    MomentChannel4 c;
    c.n_ = hilbert_dim(spec);
    if (c.n_ > 16) throw std::length_error("MomentChannel4: fourth moment needs N <= 16");
    c.factors_ = circuit_factors(spec, c.n_);
    return c;
}

MomentChannel4 MomentChannel4::for_noninteracting(int q, int linear_size) {
    MomentChannel4 c;
    c.n_ = 1;
    for (int i = 0; i < linear_size; ++i) {
        c.n_ *= static_cast<std::size_t>(q);
        if (c.n_ > 16)
            throw std::length_error("MomentChannel4: fourth moment needs N <= 16");
    }
    c.factors_ = site_factors(q, linear_size, c.n_);
    return c;
}

Eigen::VectorXcd MomentChannel4::apply(const Eigen::VectorXcd& x) const {
    if (static_cast<std::size_t>(x.size()) != n_ * n_ * n_ * n_)
        throw std::invalid_argument("MomentChannel4: vector length must be N^4");
    Eigen::VectorXcd cur = x;
    for (auto it = factors_.rbegin(); it != factors_.rend(); ++it)
        cur = apply_factor4(cur, *it, n_);
    return cur;
}

Eigen::MatrixXcd second_moment_exact(const CircuitSpec& spec) {
    const MomentChannel2 channel = MomentChannel2::for_circuit(spec);
    return channel.dense();
}

std::complex<double> fourth_moment_exact(const CircuitSpec& spec,
                                         const CircuitMomentPattern& pattern) {
    const MomentChannel4 channel = MomentChannel4::for_circuit(spec);
    const std::size_t n = channel.dim();
    check_pattern(pattern, 2, n);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n * n * n * n));
    e(static_cast<Eigen::Index>(
        flat4(pattern.cols[0], pattern.cols[1], pattern.cols_p[0], pattern.cols_p[1], n))) = 1.0;
    const Eigen::VectorXcd y = channel.apply(e);
    return y(static_cast<Eigen::Index>(
        flat4(pattern.rows[0], pattern.rows[1], pattern.rows_p[0], pattern.rows_p[1], n)));
}

double sff2_from_channel(const MomentChannel2& channel) {
    const std::size_t n = channel.dim();
    const std::size_t n2 = n * n;
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n2));
    std::complex<double> trace{0.0, 0.0};
    for (std::size_t k = 0; k < n2; ++k) {
        e(static_cast<Eigen::Index>(k)) = 1.0;
        trace += channel.apply(e)(static_cast<Eigen::Index>(k));
        e(static_cast<Eigen::Index>(k)) = 0.0;
    }
    return trace.real();
}

double sff2_from_channel(const CircuitSpec& spec) {
    return sff2_from_channel(MomentChannel2::for_circuit(spec));
}

McEstimate moment_mc(const CircuitSpec& spec, const CircuitMomentPattern& pattern, int order,
                     std::size_t n_samples, SeedSpec seed) {
    if (order != 2 && order != 4)
        throw std::invalid_argument("moment_mc: order must be 2 or 4");
    if (n_samples < 2) throw std::invalid_argument("moment_mc: need n_samples >= 2");
    const std::size_t p = static_cast<std::size_t>(order) / 2;
    const std::size_t n = hilbert_dim(spec);
    check_pattern(pattern, p, n);

    const std::uint64_t key = seed.fold();
    std::vector<std::complex<double>> vals(n_samples);
    parallel_for(n_samples, resolve_workers(0), [&](std::size_t i) {
        const UnitaryMatrix u = build_floquet(spec, derive_stream(key, i));
        std::complex<double> v{1.0, 0.0};
        for (std::size_t k = 0; k < p; ++k) {
            v *= u(static_cast<Eigen::Index>(pattern.rows[k]),
                   static_cast<Eigen::Index>(pattern.cols[k]));
            v *= std::conj(u(static_cast<Eigen::Index>(pattern.rows_p[k]),
                             static_cast<Eigen::Index>(pattern.cols_p[k])));
        }
        vals[i] = v;
    });

    std::complex<double> mean{0.0, 0.0};
    for (const auto& v : vals) mean += v;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (const auto& v : vals) var += std::norm(v - mean);
    var /= static_cast<double>(n_samples - 1);
    return McEstimate{mean, std::sqrt(var / static_cast<double>(n_samples)), n_samples};
}

}  // namespace floquet
