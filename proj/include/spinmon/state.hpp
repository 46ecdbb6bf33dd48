#pragma once

// Dense state vector over the computational (sigma^z) basis and the kernels
// the circuit needs: one/two-site gate application, Pauli expectation values,
// and the half-chain entanglement entropy from the Schmidt values of the
// reshaped amplitude matrix.
//
// Conventions (see pauli.hpp): site s = bit s of the basis index, bit 0 means
// spin up. The left half of the chain occupies the low bits.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "spinmon/model.hpp"
#include "spinmon/pauli.hpp"
#include "spinmon/philox.hpp"

namespace spinmon {

enum class InitMode { HaarSite, Basis };

// Schmidt values below this are treated as exact zeros in the entropy sum.
inline constexpr double kSchmidtCutoff = 1e-12;

// ---------------------------------------------------------------------------
// raw kernels over amplitude arrays (shared by StateVector and the
// Euler-Maruyama path, which works on frozen snapshots)

namespace kernels {

// <psi| O |psi> for an involutory Pauli (product), clamped to [-1, 1] so
// rounding noise cannot leak into cosh/sinh arguments downstream.
inline double pauli_expectation(std::span<const cplx> amps, const PauliOp& op) {
    const std::size_t n = amps.size();
    const std::size_t m0 = std::size_t{1} << op.site;
    const std::size_t m1 = m0 << 1;
    double e = 0.0;
    if (op.axis == Axis::Z) {
        for (std::size_t i = 0; i < n; ++i) {
            double sign = ((i & m0) ? -1.0 : 1.0);
            if (op.bond) sign *= ((i & m1) ? -1.0 : 1.0);
            e += sign * std::norm(amps[i]);
        }
    } else {
        const std::size_t mask = op.bond ? (m0 | m1) : m0;
        const bool y = (op.axis == Axis::Y);
        for (std::size_t i = 0; i < n; ++i) {
            // (O psi)_i = phase(i) * psi_{i ^ mask}
            cplx phase(1.0, 0.0);
            if (y) {
                phase = (i & m0) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
                if (op.bond) phase *= (i & m1) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
            }
            e += (std::conj(amps[i]) * phase * amps[i ^ mask]).real();
        }
    }
    return std::clamp(e, -1.0, 1.0);
}

// out = O |in> without touching the input.
inline void pauli_apply(std::span<const cplx> in, std::span<cplx> out,
                        const PauliOp& op) {
    const std::size_t n = in.size();
    const std::size_t m0 = std::size_t{1} << op.site;
    const std::size_t m1 = m0 << 1;
    switch (op.axis) {
        case Axis::Z:
            for (std::size_t i = 0; i < n; ++i) {
                double sign = ((i & m0) ? -1.0 : 1.0);
                if (op.bond) sign *= ((i & m1) ? -1.0 : 1.0);
                out[i] = sign * in[i];
            }
            break;
        case Axis::X: {
            const std::size_t mask = op.bond ? (m0 | m1) : m0;
            for (std::size_t i = 0; i < n; ++i) out[i] = in[i ^ mask];
            break;
        }
        case Axis::Y: {
            const std::size_t mask = op.bond ? (m0 | m1) : m0;
            for (std::size_t i = 0; i < n; ++i) {
                cplx phase = (i & m0) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
                if (op.bond) phase *= (i & m1) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
                out[i] = phase * in[i ^ mask];
            }
            break;
        }
    }
}

}  // namespace kernels

// ---------------------------------------------------------------------------

class StateVector {
  public:
    explicit StateVector(int L) : L_(L), amps_(std::size_t{1} << L, cplx(0.0, 0.0)) {
        if (L < 1 || L > 30) throw std::invalid_argument("StateVector: L out of range");
        amps_[0] = 1.0;
    }

    int num_sites() const { return L_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    std::vector<cplx>& amplitudes() { return amps_; }
    cplx amp(std::size_t i) const { return amps_[i]; }

    double norm_sq() const {
        double n = 0.0;
        for (const cplx& a : amps_) n += std::norm(a);
        return n;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    void scale(double f) {
        for (cplx& a : amps_) a *= f;
    }

    void normalize() {
        double n = norm();
        if (n <= 0.0) throw std::runtime_error("cannot normalize a zero state");
        // divide rather than multiply by the reciprocal: eigenstates of the
        // monitoring layer must come back bit-for-bit (v/v == 1.0 exactly)
        for (cplx& a : amps_) a /= n;
    }

    // ------------------------------------------------------------------
    // gate kernels

    // Apply a 2x2 matrix on `site`. Unitarity is not assumed; monitoring
    // Kraus factors come through here as well.
    void apply_one_site(const Mat2& g, int site) {
        check_site(site);
        const std::size_t m = std::size_t{1} << site;
        const cplx g00 = g(0, 0), g01 = g(0, 1), g10 = g(1, 0), g11 = g(1, 1);
        const std::size_t n = amps_.size();
        for (std::size_t base = 0; base < n; base += 2 * m) {
            for (std::size_t i = base; i < base + m; ++i) {
                const cplx a0 = amps_[i];
                const cplx a1 = amps_[i + m];
                amps_[i] = g00 * a0 + g01 * a1;
                amps_[i + m] = g10 * a0 + g11 * a1;
            }
        }
    }

    // Apply a 4x4 matrix on the adjacent pair (site, site+1); pair index is
    // bit_site + 2 * bit_{site+1}.
    void apply_two_site(const Mat4& g, int site) {
        check_site(site);
        check_site(site + 1);
        const std::size_t m0 = std::size_t{1} << site;
        const std::size_t m1 = m0 << 1;
        cplx gm[4][4];
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) gm[r][c] = g(r, c);
        const std::size_t n = amps_.size();
        // Iterate over indices with both pair bits clear.
        for (std::size_t hi = 0; hi < n; hi += 4 * m0) {
            for (std::size_t i = hi; i < hi + m0; ++i) {
                const std::size_t i1 = i | m0;
                const std::size_t i2 = i | m1;
                const std::size_t i3 = i | m0 | m1;
                const cplx a0 = amps_[i], a1 = amps_[i1], a2 = amps_[i2], a3 = amps_[i3];
                amps_[i] = gm[0][0] * a0 + gm[0][1] * a1 + gm[0][2] * a2 + gm[0][3] * a3;
                amps_[i1] = gm[1][0] * a0 + gm[1][1] * a1 + gm[1][2] * a2 + gm[1][3] * a3;
                amps_[i2] = gm[2][0] * a0 + gm[2][1] * a1 + gm[2][2] * a2 + gm[2][3] * a3;
                amps_[i3] = gm[3][0] * a0 + gm[3][1] * a1 + gm[3][2] * a2 + gm[3][3] * a3;
            }
        }
    }

    // Multiply by a diagonal one-site operator diag(d0, d1) on `site`.
    void apply_diagonal_one_site(cplx d0, cplx d1, int site) {
        check_site(site);
        const std::size_t m = std::size_t{1} << site;
        const std::size_t n = amps_.size();
        for (std::size_t base = 0; base < n; base += 2 * m) {
            for (std::size_t i = base; i < base + m; ++i) {
                amps_[i] *= d0;
                amps_[i + m] *= d1;
            }
        }
    }

    // ------------------------------------------------------------------
    // observables

    double expectation(const PauliOp& op) const {
        check_site(op.site);
        if (op.bond) check_site(op.site + 1);
        return kernels::pauli_expectation(amps_, op);
    }

    // <sum_l sigma^z_l> in one diagonal pass.
    double total_sz() const {
        double e = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            int ones = std::popcount(static_cast<uint64_t>(i));
            e += (L_ - 2 * ones) * std::norm(amps_[i]);
        }
        return e;
    }

    // Half-chain entanglement entropy S = -sum_i p_i ln p_i, p_i the squared
    // Schmidt values across the middle cut. The left block lives in the low
    // bits, so the amplitude vector maps onto a column-major
    // 2^{L/2} x 2^{L/2} matrix without copying.
    double half_chain_entropy() const {
        if (L_ % 2 != 0) throw std::invalid_argument("half_chain_entropy: L must be even");
        const Eigen::Index half = Eigen::Index{1} << (L_ / 2);
        Eigen::Map<const Eigen::MatrixXcd> M(amps_.data(), half, half);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
        double S = 0.0;
        for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
            double lam = svd.singularValues()[k];
            if (lam < kSchmidtCutoff) continue;
            double p = lam * lam;
            S -= p * std::log(p);
        }
        return std::max(S, 0.0);
    }

  private:
    void check_site(int site) const {
        if (site < 0 || site >= L_) throw std::out_of_range("site index out of range");
    }

    int L_;
    std::vector<cplx> amps_;
};

// ---------------------------------------------------------------------------
// product-state constructors

// Tensor product of per-site amplitude pairs (up, down). Pairs must be
// normalized to 1e-12.
inline StateVector product_state(int L, const std::vector<std::array<cplx, 2>>& spins) {
    if (static_cast<int>(spins.size()) != L)
        throw std::invalid_argument("product_state: need one amplitude pair per site");
    for (const auto& p : spins) {
        double n = std::norm(p[0]) + std::norm(p[1]);
        if (std::abs(n - 1.0) > 1e-12)
            throw std::invalid_argument("product_state: spin amplitudes not normalized");
    }
    StateVector psi(L);
    auto& a = psi.amplitudes();
    std::size_t filled = 1;
    for (int s = 0; s < L; ++s) {
        // extend by one site: bit s becomes the current MSB
        for (std::size_t i = 0; i < filled; ++i) {
            cplx base = a[i];
            a[i] = base * spins[s][0];
            a[i + filled] = base * spins[s][1];
        }
        filled <<= 1;
    }
    return psi;
}

// Random product state. HaarSite draws each spin uniformly from the Bloch
// sphere; Basis draws a uniform random bitstring (useful because it is an
// exact S_z eigenstate).
inline StateVector random_product_state(int L, const CounterRng& rng, InitMode mode) {
    std::vector<std::array<cplx, 2>> spins(L);
    for (int s = 0; s < L; ++s) {
        auto u = rng.uniform_pair(static_cast<uint32_t>(s), 0, RngStream::InitialState);
        if (mode == InitMode::Basis) {
            bool down = (u[0] >= 0.5);
            spins[s] = down ? std::array<cplx, 2>{cplx(0.0), cplx(1.0)}
                            : std::array<cplx, 2>{cplx(1.0), cplx(0.0)};
        } else {
            double cos_theta = 2.0 * u[0] - 1.0;
            double phi = 2.0 * M_PI * u[1];
            double c = std::sqrt(0.5 * (1.0 + cos_theta));
            double sn = std::sqrt(0.5 * (1.0 - cos_theta));
            spins[s] = {cplx(c, 0.0), std::polar(sn, phi)};
        }
    }
    return product_state(L, spins);
}

}  // namespace spinmon
