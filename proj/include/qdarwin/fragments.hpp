// fragments.hpp: atom-set fragments and their overlap statistics
//
// All statistics use the unit-normalized branch coefficients, so p_F(s) + p_Fc(s) = 1 and the
// finite lattice is a closed system.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qdarwin/common.hpp"
#include "qdarwin/signal.hpp"

namespace qdarwin::fragments {

using signal::BranchCoefficients;

/// Ordered set of lattice atoms.
class Fragment {
public:
    Fragment() = default;
    explicit Fragment(std::vector<AtomIndex> atoms) : atoms_(std::move(atoms)) {
        std::sort(atoms_.begin(), atoms_.end());
        if (std::adjacent_find(atoms_.begin(), atoms_.end()) != atoms_.end())
            throw std::invalid_argument("Fragment: duplicate atom");
    }

    /// Fragment made of the atoms at the given positions of a coefficient table.
    static Fragment from_positions(const BranchCoefficients& c, const std::vector<std::size_t>& positions) {
        std::vector<AtomIndex> atoms;
        atoms.reserve(positions.size());
        for (auto i : positions) atoms.push_back(c.atom(i));
        return Fragment(std::move(atoms));
    }

    static Fragment all(const BranchCoefficients& c) { return Fragment(c.atoms()); }

    const std::vector<AtomIndex>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    bool contains(AtomIndex a) const { return std::binary_search(atoms_.begin(), atoms_.end(), a); }

    /// Positions of the atoms in a coefficient table; throws if an atom is off the lattice.
    std::vector<std::size_t> positions_in(const BranchCoefficients& c) const {
        std::vector<std::size_t> out;
        out.reserve(atoms_.size());
        for (const auto& a : atoms_) {
            auto i = c.index_of(a);
            if (!i) throw std::invalid_argument("Fragment: atom " + to_string(a) + " is not on the lattice");
            out.push_back(*i);
        }
        return out;
    }

private:
    std::vector<AtomIndex> atoms_;
};

/// log D for a coherent probe: D = <Lambda0|Lambda1>, stored as log-modulus and phase.
struct Decoherence {
    double log_abs{0.0};
    double phase{0.0};

    double abs() const { return std::min(1.0, std::exp(log_abs)); }
    cplx value() const { return std::polar(abs(), phase); }
};

/// Single-photon statistics of a fragment and of its complement.
struct FragmentOverlap {
    double p0{0.0};   // <phi0| Pi_F |phi0>
    double p1{0.0};   // <phi1| Pi_F |phi1>
    cplx a{};         // <phi1| Pi_F |phi0>
    double p0c{1.0};
    double p1c{1.0};
    cplx ac{};
    double d2{0.0};   // sum over F of |u0 - u1|^2
    double d2c{0.0};
    /// Exact emptiness flags, so that degenerate complements are not polluted by rounding.
    bool empty{true};
    bool full{false};

    cplx a_tot() const { return a + ac; }

    // conj(u0) u1 - (|u0|^2 + |u1|^2) / 2 = -|u0 - u1|^2 / 2 + i Im(conj(u0) u1), and
    // Im(conj(u0) u1) = -Im(conj(u1) u0).
    Decoherence coherent(double nbar) const { return {-0.5 * nbar * d2, -nbar * a.imag()}; }
    Decoherence coherent_c(double nbar) const { return {-0.5 * nbar * d2c, -nbar * ac.imag()}; }
    Decoherence coherent_tot(double nbar) const { return {-0.5 * nbar * (d2 + d2c), -nbar * a_tot().imag()}; }

    /// a_F / sqrt(p0 p1), zero when p0 p1 = 0.
    cplx g() const { return normalized(a, p0, p1); }
    cplx gc() const { return normalized(ac, p0c, p1c); }

    static cplx normalized(cplx amp, double q0, double q1) {
        const double d = q0 * q1;
        if (!(d > 0.0)) return {0.0, 0.0};
        cplx v = amp / std::sqrt(d);
        const double m = std::abs(v);
        if (m > 1.0) v /= m;
        return v;
    }
};

namespace detail {

/// Per-atom additive terms, unit-normalized.
struct AtomTerms {
    double w0, w1;
    cplx a;          // conj(u1) u0
    double dist2;    // |u0 - u1|^2
};

inline AtomTerms atom_terms(const BranchCoefficients& c, std::size_t i) {
    const cplx u0 = c.unit(0)[i];
    const cplx u1 = c.unit(1)[i];
    return {std::norm(u0), std::norm(u1), std::conj(u1) * u0, std::norm(u0 - u1)};
}

}  // namespace detail

/// Additive fragment state; atoms are inserted in O(1).
class FragmentAccumulator {
public:
    explicit FragmentAccumulator(const BranchCoefficients& c) : coeffs_(&c), member_(c.size(), 0) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            terms_.push_back(detail::atom_terms(c, i));
            tot_dist2_ += terms_.back().dist2;
        }
        tot_a_ = c.unit_a_tot();
    }

    const BranchCoefficients& coefficients() const { return *coeffs_; }
    std::size_t size() const noexcept { return count_; }
    std::size_t lattice_size() const noexcept { return member_.size(); }
    bool contains(std::size_t i) const { return member_.at(i) != 0; }

    void add(std::size_t i) {
        if (member_.at(i)) throw std::invalid_argument("FragmentAccumulator: atom already present");
        member_[i] = 1;
        ++count_;
        const auto& t = terms_[i];
        p0_ += t.w0;
        p1_ += t.w1;
        a_ += t.a;
        dist2_ += t.dist2;
    }

    /// Statistics after a hypothetical insertion of atom i, without mutating the state.
    FragmentOverlap overlap_with(std::size_t i) const {
        const auto& t = terms_[i];
        return make_overlap(p0_ + t.w0, p1_ + t.w1, a_ + t.a, dist2_ + t.dist2, count_ + 1);
    }

    FragmentOverlap overlap() const { return make_overlap(p0_, p1_, a_, dist2_, count_); }
    Decoherence decoherence(double nbar) const { return overlap().coherent(nbar); }

    const detail::AtomTerms& terms(std::size_t i) const { return terms_.at(i); }

private:
    FragmentOverlap make_overlap(double p0, double p1, cplx a, double d2, std::size_t count) const {
        FragmentOverlap o;
        o.empty = count == 0;
        o.full = count == member_.size();
        if (o.empty) {
            o.ac = tot_a_;
            o.d2c = tot_dist2_;
            return o;
        }
        if (o.full) {
            o.p0 = o.p1 = 1.0;
            o.a = tot_a_;
            o.d2 = tot_dist2_;
            o.p0c = o.p1c = 0.0;
            o.ac = {0.0, 0.0};
            return o;
        }
        o.p0 = std::clamp(p0, 0.0, 1.0);
        o.p1 = std::clamp(p1, 0.0, 1.0);
        o.a = a;
        o.p0c = std::clamp(1.0 - p0, 0.0, 1.0);
        o.p1c = std::clamp(1.0 - p1, 0.0, 1.0);
        o.ac = tot_a_ - a;
        o.d2 = d2;
        o.d2c = std::max(0.0, tot_dist2_ - d2);
        return o;
    }

    const BranchCoefficients* coeffs_;
    std::vector<detail::AtomTerms> terms_;
    std::vector<char> member_;
    std::size_t count_{0};
    double p0_{0.0}, p1_{0.0};
    cplx a_{};
    double dist2_{0.0};
    double tot_dist2_{0.0};
    cplx tot_a_{};
};

/// p_F(s), a_F and their complements, computed from scratch.
inline FragmentOverlap overlap_stats(const BranchCoefficients& c, const Fragment& f) {
    FragmentAccumulator acc(c);
    for (auto i : f.positions_in(c)) acc.add(i);
    return acc.overlap();
}

/// Coherent-probe decoherence factor of a fragment at mean photon number nbar = q^2.
inline Decoherence coherent_decoherence(const BranchCoefficients& c, const Fragment& f, double nbar) {
    if (nbar < 0.0) throw std::invalid_argument("coherent_decoherence: nbar must be non-negative");
    FragmentAccumulator acc(c);
    for (auto i : f.positions_in(c)) acc.add(i);
    return acc.decoherence(nbar);
}

}  // namespace qdarwin::fragments
