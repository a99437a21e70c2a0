#pragma once

#include <algorithm>
#include <compare>
#include <vector>

namespace floquet {

// Permutation of {1..p}; images[k-1] = sigma(k), 1-based values.
struct Permutation {
    std::vector<int> images;

    int size() const { return static_cast<int>(images.size()); }
    int operator()(int k) const { return images[static_cast<std::size_t>(k) - 1]; }

    static Permutation identity(int p);
    // Validates that images is a bijection of {1..p}; throws otherwise.
    static Permutation from_images(std::vector<int> images);

    friend bool operator==(const Permutation&, const Permutation&) = default;
};

// Integer partition c1 >= c2 >= ... >= cm >= 1. Cycle type of a permutation
// and key of the Weingarten table.
struct CycleType {
    std::vector<int> parts;  // non-increasing

    int total() const;
    int num_parts() const { return static_cast<int>(parts.size()); }

    // Sorts non-increasing and validates positivity.
    static CycleType of(std::vector<int> parts);

    friend bool operator==(const CycleType&, const CycleType&) = default;
    friend auto operator<=>(const CycleType& a, const CycleType& b) {
        return a.parts <=> b.parts;
    }
};

// result(k) = a(b(k)).
Permutation compose(const Permutation& a, const Permutation& b);
Permutation inverse(const Permutation& a);
CycleType cycle_type(const Permutation& a);
// (-1)^(p - m), m = number of disjoint cycles.
int sign(const Permutation& a);

// All partitions of p in reverse-lexicographic order ([p] first, [1,..,1] last).
// Practical bound p <= 20.
std::vector<CycleType> partitions_of(int p);

// Calls fn(perm) for every permutation of {1..p} (p! calls).
template <typename F>
void for_each_permutation(int p, F&& fn) {
    Permutation perm = Permutation::identity(p);
    do {
        fn(const_cast<const Permutation&>(perm));
    } while (std::next_permutation(perm.images.begin(), perm.images.end()));
}

}  // namespace floquet
