// oracle.hpp: brute-force qubit (x) field states on a handful of modes
//
// The joint state is (|0>|Psi_0> + |1>|Psi_1>) / sqrt(2) written in the occupation basis of the
// selected atoms. Reduced density matrices come from reshaping the amplitude table and taking a
// dense Hermitian eigendecomposition of the smaller Gram matrix.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdarwin/common.hpp"
#include "qdarwin/signal.hpp"

namespace qdarwin::oracle {

using signal::BranchCoefficients;
using Occupation = std::vector<int>;

struct OracleState {
    std::size_t modes{0};
    std::vector<Occupation> basis;  // occupation tuples of all modes
    std::vector<cplx> amp[2];       // branch amplitudes, each of norm 1 / sqrt(2)
    double truncation_error{0.0};   // discarded probability before renormalization

    double norm() const {
        double s = 0.0;
        for (int b = 0; b < 2; ++b)
            for (auto v : amp[b]) s += std::norm(v);
        return std::sqrt(s);
    }
};

namespace detail {

/// All compositions of n into m non-negative parts, lexicographic.
inline std::vector<Occupation> compositions(int n, std::size_t m) {
    std::vector<Occupation> out;
    Occupation cur(m, 0);
    auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
        if (pos + 1 == m) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[pos] = v;
            self(self, pos + 1, left - v);
        }
    };
    if (m == 0) {
        if (n == 0) out.emplace_back();
        return out;
    }
    rec(rec, 0, n);
    std::sort(out.begin(), out.end());
    return out;
}

inline void check_modes(const BranchCoefficients& c, double max_residual) {
    if (c.size() == 0 || c.size() > 8) throw std::invalid_argument("oracle: mode list must hold 1 to 8 atoms");
    for (int s = 0; s < 2; ++s)
        if (1.0 - c.capture(s) > max_residual)
            throw std::invalid_argument("oracle: restricted modes miss " + std::to_string(1.0 - c.capture(s)) +
                                        " of branch " + std::to_string(s) + " energy");
}

inline double entropy_bits(const Eigen::VectorXd& ev) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double p = ev[i];
        if (p > 1e-14) h -= p * std::log2(p);
    }
    return h;
}

}  // namespace detail

/// Heaviest atoms of a lattice, kept with their absolute scale so that the missing energy is visible.
inline BranchCoefficients reduced_lattice(const signal::Wavepacket& wp, const signal::ScatteringModel& sc,
                                          double period, std::size_t max_atoms, double eps_grid = 1e-5) {
    const auto grid = signal::build_grid(wp, sc, period, eps_grid, 1u << 16);
    const auto full = signal::branch_coefficients(grid, wp, sc);
    return full.restrict_to(signal::heaviest_atoms(full, max_atoms));
}

/// n-photon Fock probe on the restricted modes (unit-normalized coefficients).
inline OracleState build_fock_state(const BranchCoefficients& c, int n, double max_residual = 1e-6) {
    if (n < 1) throw std::invalid_argument("oracle: n must be at least 1");
    detail::check_modes(c, max_residual);
    OracleState st;
    st.modes = c.size();
    st.basis = detail::compositions(n, c.size());
    const double logfact_n = std::lgamma(n + 1.0);
    for (int s = 0; s < 2; ++s) {
        st.amp[s].reserve(st.basis.size());
        for (const auto& occ : st.basis) {
            double lw = logfact_n;
            cplx prod{1.0, 0.0};
            for (std::size_t j = 0; j < occ.size(); ++j) {
                lw -= std::lgamma(occ[j] + 1.0);
                for (int r = 0; r < occ[j]; ++r) prod *= c.unit(s)[j];
            }
            st.amp[s].push_back(std::exp(0.5 * lw) * prod / std::sqrt(2.0));
        }
    }
    return st;
}

/// Multimode coherent probe of amplitude q, each mode truncated so that its discarded
/// Poisson tail is at most tail / modes.
inline OracleState build_coherent_state(const BranchCoefficients& c, double q, double tail = 1e-8,
                                        double max_residual = 1e-6, std::size_t max_dim = 1u << 16) {
    detail::check_modes(c, max_residual);
    const std::size_t m = c.size();
    std::vector<int> cutoff(m, 0);
    std::size_t dim = 1;
    for (std::size_t j = 0; j < m; ++j) {
        const double mean = q * q * std::max(std::norm(c.unit(0)[j]), std::norm(c.unit(1)[j]));
        double cdf = std::exp(-mean), term = cdf;
        int k = 0;
        while (1.0 - cdf > tail / static_cast<double>(m) && k < 200) {
            ++k;
            term *= mean / k;
            cdf += term;
        }
        cutoff[j] = k;
        dim *= static_cast<std::size_t>(k + 1);
        if (dim > max_dim) throw std::invalid_argument("oracle: coherent cutoff exceeds the dimension budget");
    }
    OracleState st;
    st.modes = m;
    Occupation cur(m, 0);
    for (std::size_t idx = 0; idx < dim; ++idx) {
        st.basis.push_back(cur);
        for (std::size_t j = m; j-- > 0;) {
            if (++cur[j] <= cutoff[j]) break;
            cur[j] = 0;
        }
    }
    double lost = 0.0;
    for (int s = 0; s < 2; ++s) {
        double norm2 = 0.0;
        st.amp[s].reserve(dim);
        for (const auto& occ : st.basis) {
            cplx v{1.0, 0.0};
            for (std::size_t j = 0; j < m; ++j) {
                const cplx alpha = q * c.unit(s)[j];
                v *= std::exp(-0.5 * std::norm(alpha) - 0.5 * std::lgamma(occ[j] + 1.0));
                for (int r = 0; r < occ[j]; ++r) v *= alpha;
            }
            st.amp[s].push_back(v);
            norm2 += std::norm(v);
        }
        lost = std::max(lost, 1.0 - norm2);
        const double scale = 1.0 / std::sqrt(2.0 * norm2);
        for (auto& v : st.amp[s]) v *= scale;
    }
    st.truncation_error = lost;
    return st;
}

/// Mode subset as a mask over the oracle modes.
using ModeMask = std::vector<bool>;

namespace detail {

struct Split {
    std::vector<int> in_idx, out_idx;  // per basis state
    std::size_t in_dim{0}, out_dim{0};
};

inline Split split_basis(const OracleState& st, const ModeMask& mask) {
    if (mask.size() != st.modes) throw std::invalid_argument("oracle: mask size mismatch");
    std::map<Occupation, int> in_map, out_map;
    Split sp;
    for (const auto& occ : st.basis) {
        Occupation a, b;
        for (std::size_t j = 0; j < occ.size(); ++j) (mask[j] ? a : b).push_back(occ[j]);
        auto ia = in_map.emplace(a, static_cast<int>(in_map.size())).first->second;
        auto ib = out_map.emplace(b, static_cast<int>(out_map.size())).first->second;
        sp.in_idx.push_back(ia);
        sp.out_idx.push_back(ib);
    }
    sp.in_dim = in_map.size();
    sp.out_dim = out_map.size();
    return sp;
}

/// Nonzero spectrum of M M^dagger.
inline Eigen::VectorXd gram_spectrum(const Eigen::MatrixXcd& M) {
    if (std::min(M.rows(), M.cols()) > 4096) throw std::invalid_argument("oracle: reduced dimension above 4096");
    Eigen::MatrixXcd G = M.rows() <= M.cols() ? Eigen::MatrixXcd(M * M.adjoint()) : Eigen::MatrixXcd(M.adjoint() * M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("oracle: eigensolver failed");
    return es.eigenvalues().cwiseMax(0.0);
}

/// Rows: qubit (optional) x kept modes; columns: the rest. Branch amplitudes are weighted by w[s].
inline Eigen::MatrixXcd reshape(const OracleState& st, const Split& sp, bool qubit_in_rows, const cplx w[2]) {
    const std::size_t rows = (qubit_in_rows ? 2 : 1) * sp.in_dim;
    const std::size_t cols = (qubit_in_rows ? 1 : 2) * sp.out_dim;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (int s = 0; s < 2; ++s) {
        if (w[s] == cplx{0.0, 0.0}) continue;
        for (std::size_t i = 0; i < st.basis.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(qubit_in_rows ? s * sp.in_dim + sp.in_idx[i] : sp.in_idx[i]);
            const auto col = static_cast<Eigen::Index>(qubit_in_rows ? sp.out_idx[i] : s * sp.out_dim + sp.out_idx[i]);
            M(r, col) += w[s] * st.amp[s][i];
        }
    }
    return M;
}

}  // namespace detail

/// Basis bookkeeping for one fragment; reusable across oracle queries on the same state.
struct Partition {
    const OracleState* state;
    detail::Split split;
};

inline Partition partition(const OracleState& st, const ModeMask& fragment) {
    return {&st, detail::split_basis(st, fragment)};
}

/// Reduced density matrix over qubit (x) fragment, by exact partial trace of the complement.
inline Eigen::MatrixXcd partial_trace(const OracleState& st, const ModeMask& fragment) {
    const auto sp = detail::split_basis(st, fragment);
    const cplx w[2] = {1.0, 1.0};
    const auto M = detail::reshape(st, sp, true, w);
    return M * M.adjoint();
}

struct OracleInfo {
    double s_system{0.0};
    double s_fragment{0.0};
    double s_joint{0.0};
    double mi{0.0};
};

inline OracleInfo oracle_info(const Partition& part) {
    const OracleState& st = *part.state;
    const auto& sp = part.split;
    const cplx w[2] = {1.0, 1.0};
    OracleInfo out;
    // qubit alone
    Eigen::Matrix2cd rs;
    cplx a00 = 0, a11 = 0, a01 = 0;
    for (std::size_t i = 0; i < st.basis.size(); ++i) {
        a00 += std::norm(st.amp[0][i]);
        a11 += std::norm(st.amp[1][i]);
        a01 += st.amp[0][i] * std::conj(st.amp[1][i]);
    }
    rs << a00, a01, std::conj(a01), a11;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rs, Eigen::EigenvaluesOnly);
    out.s_system = detail::entropy_bits(es.eigenvalues().cwiseMax(0.0));
    out.s_fragment = detail::entropy_bits(detail::gram_spectrum(detail::reshape(st, sp, false, w)));
    out.s_joint = detail::entropy_bits(detail::gram_spectrum(detail::reshape(st, sp, true, w)));
    out.mi = out.s_system + out.s_fragment - out.s_joint;
    return out;
}

inline OracleInfo oracle_info(const OracleState& st, const ModeMask& fragment) {
    return oracle_info(partition(st, fragment));
}

/// Holevo information of the fragment about a projective qubit measurement along n(theta, phi),
/// from the relative states of both outcomes.
inline double oracle_holevo(const Partition& part, double theta, double phi) {
    const OracleState& st = *part.state;
    const auto& sp = part.split;
    const cplx one[2] = {1.0, 1.0};
    const double s_f = detail::entropy_bits(detail::gram_spectrum(detail::reshape(st, sp, false, one)));
    double cond = 0.0;
    for (int sign : {+1, -1}) {
        const double t = sign > 0 ? theta : theta + kPi;
        const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
        // <n| = c e^{i phi/2} <0| + s e^{-i phi/2} <1|
        const cplx w[2] = {c * std::exp(cplx{0.0, 0.5 * phi}), s * std::exp(cplx{0.0, -0.5 * phi})};
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sp.in_dim),
                                                    static_cast<Eigen::Index>(sp.out_dim));
        for (int b = 0; b < 2; ++b)
            for (std::size_t i = 0; i < st.basis.size(); ++i) M(sp.in_idx[i], sp.out_idx[i]) += w[b] * st.amp[b][i];
        const double p = M.squaredNorm();
        if (!(p > 1e-300)) continue;
        cond += p * detail::entropy_bits(detail::gram_spectrum(M / std::sqrt(p)));
    }
    return s_f - cond;
}

inline double oracle_holevo(const OracleState& st, const ModeMask& fragment, double theta, double phi) {
    return oracle_holevo(partition(st, fragment), theta, phi);
}

/// All non-trivial and trivial subsets of the oracle modes, as masks.
inline std::vector<ModeMask> all_fragments(std::size_t modes) {
    std::vector<ModeMask> out;
    for (std::size_t bits = 0; bits < (std::size_t{1} << modes); ++bits) {
        ModeMask m(modes);
        for (std::size_t j = 0; j < modes; ++j) m[j] = (bits >> j) & 1u;
        out.push_back(m);
    }
    return out;
}

}  // namespace qdarwin::oracle
