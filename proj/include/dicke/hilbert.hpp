// hilbert.hpp — truncated boson ⊗ collective-spin product basis and its parity sectors

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "dicke/common.hpp"

namespace dicke {

enum class Parity { Even, Odd };

const char* to_string(Parity p);

// One product state |n⟩ ⊗ |j, m⟩ with m = m_idx - j.
// m_idx runs over 0..2j so that parity tests stay exact integer arithmetic.
struct BasisState {
    int n = 0;      // boson occupation, 0 ≤ n ≤ n_max
    int m_idx = 0;  // spin projection index, 0 ≤ m_idx ≤ 2j

    // excitation number N = a†a + J_z + j = n + m_idx
    int excitation() const { return n + m_idx; }

    bool operator==(const BasisState&) const = default;
};

// Parity of the excitation number: eigenvalue of Π = exp(iπN̂) is (-1)^N.
inline Parity parity_of(const BasisState& s) {
    return (s.excitation() % 2 == 1) ? Parity::Odd : Parity::Even;
}

// Ordered basis of product states, either one parity sector or the full
// product space.  Ordering is lexicographic by (n, m_idx); the index map is
// O(1) and stable, so matrix layouts and cache files are reproducible.
class Basis {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    // All states of one parity sector.  j must be a positive half-integer,
    // n_max ≥ 1.
    static Basis sector(double j, int n_max, Parity sector);

    // The unrestricted product basis (both sectors interleaved in
    // lexicographic order).  Used for block-purity checks.
    static Basis full(double j, int n_max);

    double j() const { return 0.5 * static_cast<double>(two_j_); }
    int two_j() const { return two_j_; }
    int n_max() const { return n_max_; }
    std::optional<Parity> sector() const { return sector_; }

    std::size_t size() const { return states_.size(); }
    const BasisState& state(std::size_t idx) const { return states_[idx]; }
    const std::vector<BasisState>& states() const { return states_; }

    // J_z eigenvalue of a state, m = m_idx - j
    double m_of(const BasisState& s) const { return s.m_idx - j(); }

    // Index of (n, m_idx) in this basis, npos if absent.
    std::size_t index_of(int n, int m_idx) const;

    bool compatible_with(double j, int n_max) const;

private:
    Basis(int two_j, int n_max, std::optional<Parity> sector);

    int two_j_ = 0;
    int n_max_ = 0;
    std::optional<Parity> sector_;
    std::vector<BasisState> states_;
    std::vector<std::size_t> lookup_;  // (n_max+1)*(two_j+1) slots, npos where absent

    std::size_t slot(int n, int m_idx) const {
        return static_cast<std::size_t>(n) * (two_j_ + 1) + m_idx;
    }
};

// Validates that j is a positive half-integer; returns 2j as an integer.
int checked_two_j(double j);

} // namespace dicke
