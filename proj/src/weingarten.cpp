#include "floquet/weingarten.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace floquet {

namespace {

using Row = std::map<CycleType, BigRational>;  // linear form over level unknowns

void add_term(Row& row, const CycleType& ct, const BigRational& coeff) {
    row[ct] += coeff;
}

// Partition of the previous level with one extra part of size 1, plus all
// single-part increments: the level-raising recursion
//   q V_{c,1} + sum_s c_s V_{..,c_s+1,..} = V_c.
struct Equation {
    Row lhs;
    BigRational rhs;
};

Equation raise_equation(int q, const CycleType& c, const BigRational& known_value) {
    Equation eq;
    eq.rhs = known_value;
    std::vector<int> appended = c.parts;
    appended.push_back(1);
    add_term(eq.lhs, CycleType::of(appended), make_rational(q));
    for (std::size_t s = 0; s < c.parts.size(); ++s) {
        std::vector<int> bumped = c.parts;
        bumped[s] += 1;
        add_term(eq.lhs, CycleType::of(bumped), make_rational(c.parts[s]));
    }
    return eq;
}

// Within-level recursion for partition d with distinguished part value v >= 2:
//   q V_d + sum_{cut=1}^{v-1} V_{(d\v) u {v-cut, cut}}
//         + sum_{s != distinguished} c_s V_{(d\v\c_s) u {v+c_s}} = 0.
Equation split_merge_equation(int q, const CycleType& d, int v) {
    Equation eq;
    eq.rhs = make_rational(0);
    add_term(eq.lhs, d, make_rational(q));

    std::vector<int> rest = d.parts;
    rest.erase(std::find(rest.begin(), rest.end(), v));

    for (int cut = 1; cut <= v - 1; ++cut) {
        std::vector<int> split = rest;
        split.push_back(v - cut);
        split.push_back(cut);
        add_term(eq.lhs, CycleType::of(split), make_rational(1));
    }
    for (std::size_t s = 0; s < rest.size(); ++s) {
        std::vector<int> merged;
        for (std::size_t t = 0; t < rest.size(); ++t)
            if (t != s) merged.push_back(rest[t]);
        merged.push_back(v + rest[s]);
        add_term(eq.lhs, CycleType::of(merged), make_rational(rest[s]));
    }
    return eq;
}

// Exact Gaussian elimination of the (possibly overdetermined) system; requires
// full column rank and global consistency. Returns the unique solution.
std::vector<BigRational> solve_exact(const std::vector<std::vector<BigRational>>& a,
                                     const std::vector<BigRational>& b) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::vector<std::vector<BigRational>> m(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        m[i] = a[i];
        m[i].push_back(b[i]);
    }

    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && m[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[rank], m[pivot]);
        const BigRational p = m[rank][col];
        for (std::size_t j = col; j <= cols; ++j) m[rank][j] /= p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == rank || m[i][col] == 0) continue;
            const BigRational f = m[i][col];
            for (std::size_t j = col; j <= cols; ++j) m[i][j] -= f * m[rank][j];
        }
        ++rank;
    }
    if (rank != cols)
        throw std::runtime_error("solve_exact: recursion system is rank-deficient");
    for (std::size_t i = rank; i < rows; ++i)
        if (m[i][cols] != 0)
            throw std::runtime_error("solve_exact: recursion system is inconsistent");

    std::vector<BigRational> x(cols);
    for (std::size_t i = 0; i < cols; ++i) x[i] = m[i][cols];
    return x;
}

void check_indices(const std::vector<int>& v, int q, const char* what) {
    for (int i : v)
        if (i < 1 || i > q)
            throw std::invalid_argument(std::string("haar moment: ") + what +
                                        " index outside {1..q}");
}

}  // namespace

WeingartenTable solve_table(int q, int max_p) {
    if (q < 1 || max_p < 1) throw std::invalid_argument("solve_table: q and max_p must be >= 1");
    if (max_p > q)
        throw std::domain_error("solve_table: extrapolation to p>q not supported");

    WeingartenTable table;
    table.q = q;
    table.max_p = max_p;

    for (int level = 1; level <= max_p; ++level) {
        const std::vector<CycleType> unknowns = partitions_of(level);
        std::map<CycleType, std::size_t> column;
        for (std::size_t i = 0; i < unknowns.size(); ++i) column[unknowns[i]] = i;

        std::vector<Equation> eqs;
        if (level == 1) {
            // Raising the empty partition (value 1): q V_[1] = 1.
            Equation eq;
            eq.rhs = make_rational(1);
            add_term(eq.lhs, CycleType::of({1}), make_rational(q));
            eqs.push_back(std::move(eq));
        } else {
            for (const CycleType& c : partitions_of(level - 1))
                eqs.push_back(raise_equation(q, c, table.values.at(c)));
        }
        for (const CycleType& d : unknowns) {
            std::vector<int> seen;
            for (int v : d.parts) {
                if (v < 2 || std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
                seen.push_back(v);
                eqs.push_back(split_merge_equation(q, d, v));
            }
        }

        std::vector<std::vector<BigRational>> a(eqs.size(),
                                                std::vector<BigRational>(unknowns.size()));
        std::vector<BigRational> b(eqs.size());
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            for (const auto& [ct, coeff] : eqs[i].lhs) a[i][column.at(ct)] = coeff;
            b[i] = eqs[i].rhs;
        }
        const std::vector<BigRational> x = solve_exact(a, b);

        // Residual check of every generated equation against the solution.
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            BigRational acc = -b[i];
            for (std::size_t j = 0; j < unknowns.size(); ++j) acc += a[i][j] * x[j];
            if (acc != 0)
                throw std::runtime_error("solve_table: nonzero residual after solve");
        }
        for (std::size_t i = 0; i < unknowns.size(); ++i) table.values[unknowns[i]] = x[i];
    }
    return table;
}

bool recursions_hold(const WeingartenTable& table) {
    const auto lhs_value = [&](const Row& row) {
        BigRational acc = make_rational(0);
        for (const auto& [ct, coeff] : row) acc += coeff * table.values.at(ct);
        return acc;
    };
    if (make_rational(table.q) * wg(table, CycleType::of({1})) != 1) return false;
    for (int p = 1; p < table.max_p; ++p)
        for (const CycleType& c : partitions_of(p)) {
            const Equation eq = raise_equation(table.q, c, table.values.at(c));
            if (lhs_value(eq.lhs) != eq.rhs) return false;
        }
    for (int p = 2; p <= table.max_p; ++p)
        for (const CycleType& d : partitions_of(p)) {
            std::vector<int> seen;
            for (int v : d.parts) {
                if (v < 2 || std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
                seen.push_back(v);
                const Equation eq = split_merge_equation(table.q, d, v);
                if (lhs_value(eq.lhs) != 0) return false;
            }
        }
    return true;
}

const BigRational& wg(const WeingartenTable& table, const CycleType& ct) {
    const CycleType key = CycleType::of(ct.parts);
    if (key.total() > table.max_p)
        throw std::domain_error("wg: cycle type beyond table.max_p");
    const auto it = table.values.find(key);
    if (it == table.values.end()) throw std::domain_error("wg: missing partition");
    return it->second;
}

BigRational haar_moment(const WeingartenTable& table, const MomentPattern& pat) {
    const int p = pat.p;
    if (p < 1) throw std::invalid_argument("haar_moment: p must be >= 1");
    if (static_cast<int>(pat.rows.size()) != p || static_cast<int>(pat.cols.size()) != p ||
        static_cast<int>(pat.rows_p.size()) != p || static_cast<int>(pat.cols_p.size()) != p)
        throw std::invalid_argument("haar_moment: all four index sequences must have length p");
    if (p > table.max_p) throw std::domain_error("haar_moment: p beyond table.max_p");
    check_indices(pat.rows, table.q, "row");
    check_indices(pat.cols, table.q, "col");
    check_indices(pat.rows_p, table.q, "row'");
    check_indices(pat.cols_p, table.q, "col'");

    // Delta-filter each side first: sigma survives iff i_k = i'_sigma(k) for
    // all k, tau iff j_k = j'_tau(k); only survivors enter the double sum.
    std::vector<Permutation> sigmas, taus;
    for_each_permutation(p, [&](const Permutation& s) {
        for (int k = 1; k <= p; ++k)
            if (pat.rows[static_cast<std::size_t>(k) - 1] !=
                pat.rows_p[static_cast<std::size_t>(s(k)) - 1])
                return;
        sigmas.push_back(s);
    });
    for_each_permutation(p, [&](const Permutation& t) {
        for (int k = 1; k <= p; ++k)
            if (pat.cols[static_cast<std::size_t>(k) - 1] !=
                pat.cols_p[static_cast<std::size_t>(t(k)) - 1])
                return;
        taus.push_back(t);
    });

    BigRational acc = make_rational(0);
    for (const Permutation& t : taus) {
        const Permutation t_inv = inverse(t);
        for (const Permutation& s : sigmas) acc += wg(table, cycle_type(compose(t_inv, s)));
    }
    return acc;
}

McEstimate haar_moment_mc(int q, const MomentPattern& pat, std::size_t n_samples, SeedSpec seed) {
    if (n_samples < 2) throw std::invalid_argument("haar_moment_mc: need n_samples >= 2");
    check_indices(pat.rows, q, "row");
    check_indices(pat.cols, q, "col");
    check_indices(pat.rows_p, q, "row'");
    check_indices(pat.cols_p, q, "col'");

    const std::uint64_t key = seed.fold();
    std::vector<std::complex<double>> vals(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const UnitaryMatrix u = cue_sample(q, derive_stream(key, s));
        std::complex<double> prod{1.0, 0.0};
        for (int k = 0; k < pat.p; ++k) {
            prod *= u(pat.rows[static_cast<std::size_t>(k)] - 1,
                      pat.cols[static_cast<std::size_t>(k)] - 1);
            prod *= std::conj(u(pat.rows_p[static_cast<std::size_t>(k)] - 1,
                                pat.cols_p[static_cast<std::size_t>(k)] - 1));
        }
        vals[s] = prod;
    }

    std::complex<double> mean{0.0, 0.0};
    for (const auto& v : vals) mean += v;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (const auto& v : vals) var += std::norm(v - mean);
    var /= static_cast<double>(n_samples - 1);
    return McEstimate{mean, std::sqrt(var / static_cast<double>(n_samples)), n_samples};
}

std::vector<ScaledWg> asymptotic_check(const CycleType& ct, const std::vector<int>& q_list) {
    const int p = ct.total();
    const int m = ct.num_parts();
    std::vector<ScaledWg> out;
    out.reserve(q_list.size());
    for (int q : q_list) {
        if (q < p) throw std::domain_error("asymptotic_check: need q >= ct.total");
        const WeingartenTable table = solve_table(q, p);
        BigRational scaled = wg(table, ct);
        for (int e = 0; e < 2 * p - m; ++e) scaled *= q;
        out.push_back(ScaledWg{q, to_double(scaled)});
    }
    return out;
}

void write_table(std::ostream& os, const WeingartenTable& table) {
    os << "wg-table v1 q=" << table.q << " max_p=" << table.max_p << "\n";
    for (int p = 1; p <= table.max_p; ++p) {
        for (const CycleType& ct : partitions_of(p)) {
            for (std::size_t i = 0; i < ct.parts.size(); ++i) {
                if (i) os << ',';
                os << ct.parts[i];
            }
            os << ' ' << rational_to_string(table.values.at(ct)) << "\n";
        }
    }
}

WeingartenTable read_table(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("read_table: empty input");
    WeingartenTable table;
    {
        std::istringstream re(header);
        std::string tok;
        re >> tok;
        if (tok != "wg-table") throw std::runtime_error("read_table: bad magic");
        re >> tok;
        if (tok != "v1") throw std::runtime_error("read_table: unsupported version");
        re >> tok;
        if (tok.rfind("q=", 0) != 0) throw std::runtime_error("read_table: missing q=");
        try {
            table.q = std::stoi(tok.substr(2));
            re >> tok;
            if (tok.rfind("max_p=", 0) != 0)
                throw std::runtime_error("read_table: missing max_p=");
            table.max_p = std::stoi(tok.substr(6));
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("read_table: bad header: ") + e.what());
        }
    }

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string parts_field, value_field;
        if (!(ls >> parts_field >> value_field))
            throw std::runtime_error("read_table: malformed line '" + line + "'");
        try {
            std::vector<int> parts;
            std::istringstream ps(parts_field);
            std::string item;
            while (std::getline(ps, item, ',')) parts.push_back(std::stoi(item));
            table.values[CycleType::of(parts)] = rational_from_string(value_field);
        } catch (const std::exception& e) {
            throw std::runtime_error("read_table: malformed line '" + line + "': " + e.what());
        }
    }

    for (int p = 1; p <= table.max_p; ++p)
        for (const CycleType& ct : partitions_of(p))
            if (!table.values.count(ct))
                throw std::runtime_error("read_table: missing partition entry");
    return table;
}

}  // namespace floquet
