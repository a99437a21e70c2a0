#include <doctest.h>

#include <floquet/perm.hpp>
#include <floquet/rational.hpp>
#include <floquet/weingarten.hpp>

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

using namespace floquet;

namespace {

BigRational rat(long num, long den = 1) { return make_rational(num, den); }

// Re-derives both recursion residuals straight from the table values, coded
// independently of the solver's equation builders.
//
// Level raising: for a partition c of p,
//   q * V_{c + [1]} + sum_s c_s * V_{c with one part c_s -> c_s + 1} = V_c,
// anchored at level 1 by q * V_[1] = 1.
//
// Within level: for a partition d of p with some part value v >= 2,
//   q * V_d + sum_{cut=1}^{v-1} V_{d with v -> (v-cut, cut)}
//          + sum_{other parts s, counted with multiplicity} s * V_{d with v,s -> v+s} = 0.
bool table_satisfies_recursions(const WeingartenTable& t) {
    const auto value = [&](std::vector<int> parts) -> BigRational {
        return wg(t, CycleType::of(std::move(parts)));
    };
    if (BigRational(t.q) * value({1}) != rat(1)) return false;

    for (int p = 1; p < t.max_p; ++p) {
        for (const CycleType& c : partitions_of(p)) {
            std::vector<int> appended = c.parts;
            appended.push_back(1);
            BigRational lhs = BigRational(t.q) * value(appended);
            for (std::size_t k = 0; k < c.parts.size(); ++k) {
                std::vector<int> bumped = c.parts;
                bumped[k] += 1;
                lhs += BigRational(c.parts[k]) * value(bumped);
            }
            if (lhs != value(c.parts)) return false;
        }
    }

    for (int p = 2; p <= t.max_p; ++p) {
        for (const CycleType& d : partitions_of(p)) {
            std::vector<int> seen;
            for (std::size_t idx = 0; idx < d.parts.size(); ++idx) {
                const int v = d.parts[idx];
                if (v < 2) continue;
                if (std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
                seen.push_back(v);

                std::vector<int> rest = d.parts;
                rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(idx));

                BigRational lhs = BigRational(t.q) * value(d.parts);
                for (int cut = 1; cut < v; ++cut) {
                    std::vector<int> split = rest;
                    split.push_back(v - cut);
                    split.push_back(cut);
                    lhs += value(split);
                }
                for (std::size_t k = 0; k < rest.size(); ++k) {
                    std::vector<int> merged = rest;
                    merged.erase(merged.begin() + static_cast<std::ptrdiff_t>(k));
                    merged.push_back(v + rest[k]);
                    lhs += BigRational(rest[k]) * value(merged);
                }
                if (lhs != rat(0)) return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("weingarten") {

TEST_CASE("level 1 and 2 values at q = 3") {
    const WeingartenTable t = solve_table(3, 2);
    CHECK(wg(t, CycleType::of({1})) == rat(1, 3));
    CHECK(wg(t, CycleType::of({1, 1})) == rat(1, 8));
    CHECK(wg(t, CycleType::of({2})) == rat(-1, 24));
}

TEST_CASE("level 2 closed forms hold for several q") {
    // V_[1,1] = 1/(q^2-1), V_[2] = -1/(q(q^2-1)).
    for (int q : {2, 3, 4, 5, 6, 9}) {
        const WeingartenTable t = solve_table(q, 2);
        const long qq = static_cast<long>(q);
        CHECK(wg(t, CycleType::of({1})) == rat(1, qq));
        CHECK(wg(t, CycleType::of({1, 1})) == rat(1, qq * qq - 1));
        CHECK(wg(t, CycleType::of({2})) == rat(-1, qq * (qq * qq - 1)));
    }
    const WeingartenTable t5 = solve_table(5, 2);
    CHECK(wg(t5, CycleType::of({1, 1})) * rat(24) == rat(1));
}

TEST_CASE("level 3 closed forms hold for several q") {
    // V_[3] = 2/(q(q^2-1)(q^2-4)), V_[2,1] = -1/((q^2-1)(q^2-4)),
    // V_[1,1,1] = (q^2-2)/(q(q^2-1)(q^2-4)).
    for (int q : {3, 4, 6}) {
        const WeingartenTable t = solve_table(q, 3);
        const long qq = static_cast<long>(q);
        const long denom = qq * (qq * qq - 1) * (qq * qq - 4);
        CHECK(wg(t, CycleType::of({3})) == rat(2, denom));
        CHECK(wg(t, CycleType::of({2, 1})) == rat(-qq, denom));
        CHECK(wg(t, CycleType::of({1, 1, 1})) == rat(qq * qq - 2, denom));
    }
    const WeingartenTable t6 = solve_table(6, 3);
    CHECK(wg(t6, CycleType::of({3})) == rat(1, 3360));
    CHECK(wg(t6, CycleType::of({2, 1})) == rat(-1, 1120));
    CHECK(wg(t6, CycleType::of({1, 1, 1})) == rat(17, 3360));
}

TEST_CASE("specific recursion residuals vanish exactly at q = 6") {
    const WeingartenTable t = solve_table(6, 3);
    // Within-level equation for d = [3]: q V_[3] + 2 V_[2,1] = 0.
    CHECK(rat(6) * wg(t, CycleType::of({3})) + rat(2) * wg(t, CycleType::of({2, 1})) == rat(0));
    // Within-level equation for d = [2,1]: q V_[2,1] + V_[1,1,1] + V_[3] = 0.
    CHECK(rat(6) * wg(t, CycleType::of({2, 1})) + wg(t, CycleType::of({1, 1, 1})) +
              wg(t, CycleType::of({3})) ==
          rat(0));
    // Level-raising from c = [2]: q V_[2,1] + 2 V_[3] = V_[2].
    CHECK(rat(6) * wg(t, CycleType::of({2, 1})) + rat(2) * wg(t, CycleType::of({3})) ==
          wg(t, CycleType::of({2})));
}

TEST_CASE("all defining recursions hold on solved tables") {
    for (int q : {4, 5, 6}) {
        const WeingartenTable t = solve_table(q, 4);
        CHECK(recursions_hold(t));
        CHECK(table_satisfies_recursions(t));
    }
}

TEST_CASE("lookup canonicalizes part order") {
    const WeingartenTable t = solve_table(4, 3);
    CHECK(wg(t, CycleType::of({1, 2})) == wg(t, CycleType::of({2, 1})));
}

TEST_CASE("domain limits are enforced") {
    CHECK_THROWS_AS(solve_table(2, 3), std::domain_error);
    CHECK_THROWS_AS(solve_table(0, 1), std::invalid_argument);
    const WeingartenTable t = solve_table(3, 2);
    CHECK_THROWS_AS(wg(t, CycleType::of({2, 1})), std::domain_error);
}

TEST_CASE("haar_moment reproduces first and second moment patterns") {
    const WeingartenTable t3 = solve_table(3, 2);
    // <U_11 U†_11> = 1/q.
    CHECK(haar_moment(t3, MomentPattern{1, {1}, {1}, {1}, {1}}) == rat(1, 3));
    // Mismatched row index kills the average.
    CHECK(haar_moment(t3, MomentPattern{1, {1}, {1}, {2}, {1}}) == rat(0));
    // <U_11 U_22 U†_11 U†_22> = 1/(q^2-1).
    CHECK(haar_moment(t3, MomentPattern{2, {1, 2}, {1, 2}, {1, 2}, {1, 2}}) == rat(1, 8));
    const WeingartenTable t2 = solve_table(2, 2);
    CHECK(haar_moment(t2, MomentPattern{2, {1, 2}, {1, 2}, {1, 2}, {1, 2}}) == rat(1, 3));
    // Swapped primed rows pick up the transposition term only.
    CHECK(haar_moment(t2, MomentPattern{2, {1, 2}, {1, 2}, {2, 1}, {2, 1}}) == rat(1, 3));
    // Repeated rows admit both permutations: V_[1,1] + V_[2] = 1/(q(q+1)).
    CHECK(haar_moment(t2, MomentPattern{2, {1, 1}, {1, 2}, {1, 1}, {2, 1}}) == rat(1, 6));
}

TEST_CASE("haar_moment row sum telescopes to one") {
    // sum_j <|U_{2 j}|^2> = 1 exactly, a unitarity constraint the moment
    // engine must reproduce termwise.
    const WeingartenTable t = solve_table(3, 1);
    BigRational total = rat(0);
    for (int j = 1; j <= 3; ++j)
        total += haar_moment(t, MomentPattern{1, {2}, {j}, {2}, {j}});
    CHECK(total == rat(1));
}

TEST_CASE("haar_moment is invariant under index relabeling") {
    const WeingartenTable t = solve_table(3, 2);
    std::mt19937_64 eng(21);
    std::uniform_int_distribution<int> pick(1, 3);
    const std::vector<std::vector<int>> relabels = {{2, 3, 1}, {3, 1, 2}, {2, 1, 3}};
    for (int trial = 0; trial < 30; ++trial) {
        MomentPattern pat;
        pat.p = 2;
        for (int k = 0; k < 2; ++k) {
            pat.rows.push_back(pick(eng));
            pat.cols.push_back(pick(eng));
            pat.rows_p.push_back(pick(eng));
            pat.cols_p.push_back(pick(eng));
        }
        const BigRational base = haar_moment(t, pat);
        for (const auto& chi : relabels) {
            MomentPattern mapped = pat;
            const auto apply = [&](std::vector<int>& v) {
                for (int& x : v) x = chi[static_cast<std::size_t>(x) - 1];
            };
            apply(mapped.rows);
            apply(mapped.rows_p);
            const BigRational rows_only = haar_moment(t, mapped);
            CHECK(rows_only == base);
            apply(mapped.cols);
            apply(mapped.cols_p);
            CHECK(haar_moment(t, mapped) == base);
        }
    }
}

TEST_CASE("haar_moment validates patterns") {
    const WeingartenTable t = solve_table(3, 2);
    CHECK_THROWS_AS(haar_moment(t, MomentPattern{2, {1}, {1, 2}, {1, 2}, {1, 2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(haar_moment(t, MomentPattern{1, {4}, {1}, {1}, {1}}), std::invalid_argument);
    CHECK_THROWS_AS(haar_moment(t, MomentPattern{3, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}}),
                    std::domain_error);
}

TEST_CASE("Monte Carlo estimates agree with exact moments") {
    struct Case {
        int q;
        MomentPattern pat;
    };
    const std::vector<Case> cases = {
        {3, MomentPattern{1, {1}, {1}, {1}, {1}}},
        {3, MomentPattern{1, {1}, {1}, {2}, {1}}},
        {2, MomentPattern{2, {1, 2}, {1, 2}, {1, 2}, {1, 2}}},
        {4, MomentPattern{2, {1, 2}, {3, 4}, {2, 1}, {4, 3}}},
        {3, MomentPattern{3, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}}},
        {4, MomentPattern{3, {1, 1, 2}, {1, 2, 3}, {1, 1, 2}, {2, 1, 3}}},
    };
    std::uint64_t stream = 0;
    for (const Case& c : cases) {
        const WeingartenTable t = solve_table(c.q, c.pat.p);
        const double exact = to_double(haar_moment(t, c.pat));
        const std::size_t n = c.pat.p >= 3 ? 40000 : 100000;
        const McEstimate est = haar_moment_mc(c.q, c.pat, n, derive_stream(7100, stream++));
        REQUIRE(est.n_samples == n);
        REQUIRE(est.std_error > 0.0);
        CHECK(std::abs(est.mean.real() - exact) <= 5.0 * est.std_error);
        CHECK(std::abs(est.mean.imag()) <= 5.0 * est.std_error);
    }
}

TEST_CASE("scaled values approach the large-q limit") {
    // q^(2p-m) * Wg converges; for [1,..,1] the limit is 1 and the residual
    // shrinks by about 4x per doubling of q.
    const std::vector<int> qs = {8, 16, 32};

    const auto residuals = [&](const CycleType& ct, double limit) {
        std::vector<double> out;
        for (const ScaledWg& s : asymptotic_check(ct, qs)) out.push_back(std::abs(s.scaled - limit));
        return out;
    };

    for (const ScaledWg& s : asymptotic_check(CycleType::of({1}), qs))
        CHECK(s.scaled == doctest::Approx(1.0).epsilon(1e-15));

    const std::vector<double> r11 = residuals(CycleType::of({1, 1}), 1.0);
    // Exact scaled value is 1/(1 - q^-2): check the first entry directly.
    CHECK(asymptotic_check(CycleType::of({1, 1}), {8})[0].scaled ==
          doctest::Approx(64.0 / 63.0).epsilon(1e-14));
    const std::vector<double> r2 = residuals(CycleType::of({2}), -1.0);
    const std::vector<double> r21 = residuals(CycleType::of({2, 1}), -1.0);
    for (const std::vector<double>* r : {&r11, &r2, &r21}) {
        REQUIRE(r->size() == 3);
        CHECK((*r)[1] <= (*r)[0] / 3.0);
        CHECK((*r)[2] <= (*r)[1] / 3.0);
    }
}

TEST_CASE("serialization round-trips exactly") {
    const WeingartenTable t = solve_table(5, 3);
    std::stringstream ss;
    write_table(ss, t);
    const std::string text = ss.str();
    CHECK(text.find("wg-table v1 q=5 max_p=3") == 0);
    CHECK(text.find("1 1/5\n") != std::string::npos);

    std::stringstream in(text);
    const WeingartenTable back = read_table(in);
    CHECK(back.q == t.q);
    CHECK(back.max_p == t.max_p);
    REQUIRE(back.values.size() == t.values.size());
    for (const auto& [ct, v] : t.values) {
        REQUIRE(back.values.count(ct) == 1);
        CHECK(back.values.at(ct) == v);
    }
}

TEST_CASE("read_table rejects malformed input") {
    const auto reject = [](const std::string& text) {
        std::stringstream in(text);
        CHECK_THROWS_AS(read_table(in), std::runtime_error);
    };
    reject("");
    reject("wg-table v2 q=3 max_p=1\n1 1/3\n");
    reject("wg-table v1 q=3 max_p=2\n1 1/3\n");  // missing level-2 entries
    reject("wg-table v1 q=3 max_p=1\n1 one-third\n");
}

}  // TEST_SUITE
