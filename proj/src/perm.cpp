#include "floquet/perm.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace floquet {

Permutation Permutation::identity(int p) {
    if (p < 0) throw std::invalid_argument("Permutation::identity: negative size");
    Permutation r;
    r.images.resize(static_cast<std::size_t>(p));
    std::iota(r.images.begin(), r.images.end(), 1);
    return r;
}

Permutation Permutation::from_images(std::vector<int> images) {
    const int p = static_cast<int>(images.size());
    std::vector<char> seen(static_cast<std::size_t>(p) + 1, 0);
    for (int v : images) {
        if (v < 1 || v > p || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("Permutation::from_images: not a bijection of {1..p}");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return Permutation{std::move(images)};
}

int CycleType::total() const {
    int s = 0;
    for (int c : parts) s += c;
    return s;
}

CycleType CycleType::of(std::vector<int> parts) {
    for (int c : parts)
        if (c < 1) throw std::invalid_argument("CycleType::of: parts must be >= 1");
    std::sort(parts.begin(), parts.end(), std::greater<int>());
    return CycleType{std::move(parts)};
}

Permutation compose(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw std::invalid_argument("compose: size mismatch");
    Permutation r;
    r.images.resize(b.images.size());
    for (int k = 1; k <= b.size(); ++k) r.images[static_cast<std::size_t>(k) - 1] = a(b(k));
    return r;
}

Permutation inverse(const Permutation& a) {
    Permutation r;
    r.images.resize(a.images.size());
    for (int k = 1; k <= a.size(); ++k) r.images[static_cast<std::size_t>(a(k)) - 1] = k;
    return r;
}

CycleType cycle_type(const Permutation& a) {
    const int p = a.size();
    std::vector<char> visited(static_cast<std::size_t>(p) + 1, 0);
    std::vector<int> parts;
    for (int k = 1; k <= p; ++k) {
        if (visited[static_cast<std::size_t>(k)]) continue;
        int len = 0;
        int j = k;
        while (!visited[static_cast<std::size_t>(j)]) {
            visited[static_cast<std::size_t>(j)] = 1;
            j = a(j);
            ++len;
        }
        parts.push_back(len);
    }
    return CycleType::of(std::move(parts));
}

int sign(const Permutation& a) {
    const int m = cycle_type(a).num_parts();
    return ((a.size() - m) % 2 == 0) ? 1 : -1;
}

std::vector<CycleType> partitions_of(int p) {
    if (p < 1 || p > 20) throw std::invalid_argument("partitions_of: p must be in [1, 20]");
    std::vector<CycleType> out;
    std::vector<int> cur;
    // Descending-first recursion emits reverse-lexicographic order directly.
    std::function<void(int, int)> rec = [&](int remaining, int max_part) {
        if (remaining == 0) {
            out.push_back(CycleType{cur});
            return;
        }
        for (int c = std::min(remaining, max_part); c >= 1; --c) {
            cur.push_back(c);
            rec(remaining - c, c);
            cur.pop_back();
        }
    };
    rec(p, p);
    return out;
}

}  // namespace floquet
