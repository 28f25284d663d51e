#pragma once

#include "kgflow/nonlinearity.hpp"

#include <string>
#include <vector>

namespace corpus {

using kgflow::CubicNonlinearity;
using kgflow::MonomialKey;
using kgflow::Rational;

// slot order: u, utx, uxx, ut, ux
inline MonomialKey key(unsigned u, unsigned utx, unsigned uxx, unsigned ut, unsigned ux) {
    return MonomialKey{{u, utx, uxx, ut, ux}};
}

struct Entry {
    std::string name;
    CubicNonlinearity p;
    bool null;  ///< expected verdict
};

inline CubicNonlinearity make(std::initializer_list<std::pair<MonomialKey, Rational>> terms) {
    CubicNonlinearity p;
    for (auto& [k, c] : terms) p.add(k, c);
    return p;
}

/// Twenty cubic nonlinearities; the null members were derived by hand from Phi = P'_1 + P''_1 + 3 P'_3.
inline std::vector<Entry> twenty() {
    const Rational third(1, 3);
    return {
        {"u^3", make({{key(3, 0, 0, 0, 0), 1}}), true},
        {"u^2 uxx", make({{key(2, 0, 1, 0, 0), 1}}), true},
        {"u ut^2", make({{key(1, 0, 0, 2, 0), 1}}), true},
        {"u ux^2", make({{key(1, 0, 0, 0, 2), 1}}), true},
        {"ut^3 - ut ux^2 - 3 u^2 ut", make({{key(0, 0, 0, 3, 0), 1}, {key(0, 0, 0, 1, 2), -1}, {key(2, 0, 0, 1, 0), -3}}),
         true},
        {"ux^3 - ut^2 ux + 3 u^2 ux", make({{key(0, 0, 0, 0, 3), 1}, {key(0, 0, 0, 2, 1), -1}, {key(2, 0, 0, 0, 1), 3}}),
         true},
        {"u ut uxx + ut ux^2/3", make({{key(1, 0, 1, 1, 0), 1}, {key(0, 0, 0, 1, 2), third}}), true},
        {"u ux utx + ut ux^2/3", make({{key(1, 1, 0, 0, 1), 1}, {key(0, 0, 0, 1, 2), third}}), true},
        {"u^3 + u^2 uxx", make({{key(3, 0, 0, 0, 0), 1}, {key(2, 0, 1, 0, 0), 1}}), true},
        {"u ut^2/2 - u ux^2 + 2 u^3",
         make({{key(1, 0, 0, 2, 0), Rational(1, 2)}, {key(1, 0, 0, 0, 2), -1}, {key(3, 0, 0, 0, 0), 2}}), true},
        {"ut ux utx", make({{key(0, 1, 0, 1, 1), 1}}), true},
        {"ux^2 uxx", make({{key(0, 0, 1, 0, 2), 1}}), true},
        {"ut^3", make({{key(0, 0, 0, 3, 0), 1}}), false},
        {"u^2 ut", make({{key(2, 0, 0, 1, 0), 1}}), false},
        {"u^2 ux", make({{key(2, 0, 0, 0, 1), 1}}), false},
        {"ux^3", make({{key(0, 0, 0, 0, 3), 1}}), false},
        {"ut ux^2", make({{key(0, 0, 0, 1, 2), 1}}), false},
        {"u ut uxx", make({{key(1, 0, 1, 1, 0), 1}}), false},
        {"u ux utx", make({{key(1, 1, 0, 0, 1), 1}}), false},
        {"ut^3 + u^3", make({{key(0, 0, 0, 3, 0), 1}, {key(3, 0, 0, 0, 0), 1}}), false},
    };
}

}  // namespace corpus
