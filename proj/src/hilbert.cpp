#include "dicke/hilbert.hpp"

#include <cmath>

namespace dicke {

const char* to_string(Parity p) {
    return p == Parity::Odd ? "odd" : "even";
}

int checked_two_j(double j) {
    const double two_j = 2.0 * j;
    const double rounded = std::round(two_j);
    if (!(j > 0.0) || std::abs(two_j - rounded) > 1e-9 || rounded < 1.0) {
        throw ConfigError("pseudospin length j must be a positive half-integer");
    }
    return static_cast<int>(rounded);
}

Basis::Basis(int two_j, int n_max, std::optional<Parity> sector)
    : two_j_(two_j), n_max_(n_max), sector_(sector) {
    if (n_max < 1) {
        throw ConfigError("boson cutoff n_max must be at least 1");
    }
    const std::size_t slots = static_cast<std::size_t>(n_max_ + 1) * (two_j_ + 1);
    lookup_.assign(slots, npos);
    states_.reserve(sector_ ? (slots + 1) / 2 : slots);
    for (int n = 0; n <= n_max_; ++n) {
        for (int m_idx = 0; m_idx <= two_j_; ++m_idx) {
            const BasisState s{n, m_idx};
            if (sector_ && parity_of(s) != *sector_) continue;
            lookup_[slot(n, m_idx)] = states_.size();
            states_.push_back(s);
        }
    }
}

Basis Basis::sector(double j, int n_max, Parity sector) {
    return Basis(checked_two_j(j), n_max, sector);
}

Basis Basis::full(double j, int n_max) {
    return Basis(checked_two_j(j), n_max, std::nullopt);
}

std::size_t Basis::index_of(int n, int m_idx) const {
    if (n < 0 || n > n_max_ || m_idx < 0 || m_idx > two_j_) return npos;
    return lookup_[slot(n, m_idx)];
}

bool Basis::compatible_with(double j, int n_max) const {
    return n_max == n_max_ && std::abs(2.0 * j - two_j_) <= 1e-9;
}

} // namespace dicke
