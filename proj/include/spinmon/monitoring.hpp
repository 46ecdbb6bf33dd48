#pragma once

// Stochastic measurement layer for homodyne (weak, continuous) monitoring of
// a set of involutory Pauli operators {O_l}.
//
// Production path ("Exponentiated"): apply the normalized Kraus factor
//     |psi'>  ~  exp( sum_l c_l O_l ) |psi>,   c_l = dxi_l + 2 gamma <O_l> dt,
// with dxi_l ~ N(0, gamma dt) (Ito). Because each O_l squares to the identity
// and the monitored set is mutually commuting within a layer*, the
// exponential factorizes into per-operator factors
//     exp(c O) = cosh(c) 1 + sinh(c) O,
// each applied as a dense 1- or 2-site gate. Expanding the normalized update
// to first order in dt reproduces the diffusive stochastic Schroedinger
// equation with drift (O - <O>) dxi and no-jump damping -(gamma/2)(O - <O>)^2 dt.
//
// (*) Site monitors act on disjoint sites; bond monitors of a common axis
// commute with each other even on overlapping bonds since sigma^a sigma^a
// factors commute componentwise.
//
// Reference path ("EulerMaruyama"): the literal first-order update
//     |psi'> = |psi> + sum_l [ (dxi_l + gamma <O_l> dt) O_l
//                              - (dxi_l <O_l> + gamma/2 (1 + <O_l>^2) dt) ] |psi>
// followed by normalization. Slower and only first-order accurate; kept as an
// independent cross-check of the exponentiated scheme.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spinmon/model.hpp"
#include "spinmon/pauli.hpp"
#include "spinmon/philox.hpp"
#include "spinmon/state.hpp"

namespace spinmon {

enum class Scheme { Exponentiated, EulerMaruyama };

inline const char* scheme_name(Scheme s) {
    return s == Scheme::Exponentiated ? "exponentiated" : "euler-maruyama";
}

// Wiener increments for one trajectory: dxi ~ N(0, gamma dt), indexed by
// (step, operator) so that a trajectory's noise is a pure function of
// (master seed, trajectory index) regardless of evaluation order.
class NoiseStream {
  public:
    NoiseStream(uint64_t master_seed, uint64_t trajectory, double gamma, double dt)
        : rng_(master_seed, trajectory), sigma_(std::sqrt(gamma * dt)) {}

    double draw(uint32_t step, uint32_t op_index) const {
        return sigma_ * rng_.gaussian(step, op_index, RngStream::MeasurementNoise);
    }

    double sigma() const { return sigma_; }

  private:
    CounterRng rng_;
    double sigma_;
};

// Scratch buffers reused across steps to keep the Euler-Maruyama path free of
// per-step allocation.
struct MonitorWorkspace {
    std::vector<cplx> original;
    std::vector<cplx> op_psi;
};

// Apply prod_l [ cosh(c_l) + sinh(c_l) O_l ] and normalize once at the end.
// Exposed separately from homodyne_layer so tests can inject coefficients.
inline void apply_kraus_factors(StateVector& psi, const std::vector<PauliOp>& ops,
                                const std::vector<double>& coeffs) {
    if (ops.size() != coeffs.size())
        throw std::invalid_argument("apply_kraus_factors: ops/coeffs size mismatch");
    for (std::size_t l = 0; l < ops.size(); ++l) {
        const double ch = std::cosh(coeffs[l]);
        const double sh = std::sinh(coeffs[l]);
        if (!ops[l].bond) {
            Mat2 g = ch * Mat2::Identity() + sh * pauli(ops[l].axis);
            psi.apply_one_site(g, ops[l].site);
        } else {
            Mat4 g = ch * Mat4::Identity() + sh * pauli_pair(ops[l].axis);
            psi.apply_two_site(g, ops[l].site);
        }
    }
    psi.normalize();
}

namespace detail {
// The Ito expectation values below assume <psi|psi> = 1; a drifting norm
// would silently bias every coefficient, so reject it loudly instead.
inline void require_normalized(const StateVector& psi) {
    if (std::abs(psi.norm_sq() - 1.0) > 1e-8)
        throw std::invalid_argument("measurement layer requires a normalized state");
}
}  // namespace detail

// One homodyne measurement layer (exponentiated scheme). All expectation
// values are taken on the pre-layer state, matching the Ito convention.
inline void homodyne_layer(StateVector& psi, const std::vector<PauliOp>& ops,
                           const NoiseStream& noise, uint32_t step_index,
                           double gamma, double dt) {
    if (gamma == 0.0 || ops.empty()) return;
    detail::require_normalized(psi);
    std::vector<double> coeffs(ops.size());
    for (std::size_t l = 0; l < ops.size(); ++l) {
        const double e = psi.expectation(ops[l]);
        const double dxi = noise.draw(step_index, static_cast<uint32_t>(l));
        coeffs[l] = dxi + 2.0 * gamma * e * dt;
    }
    apply_kraus_factors(psi, ops, coeffs);
}

// One Euler-Maruyama measurement layer (reference scheme). Uses the same
// NoiseStream indexing as homodyne_layer, so the two schemes see identical
// Wiener increments for a given (seed, trajectory, step).
inline void euler_maruyama_layer(StateVector& psi, const std::vector<PauliOp>& ops,
                                 const NoiseStream& noise, uint32_t step_index,
                                 double gamma, double dt, MonitorWorkspace& ws) {
    if (gamma == 0.0 || ops.empty()) return;
    detail::require_normalized(psi);
    const std::size_t n = psi.dim();
    ws.original.assign(psi.amplitudes().begin(), psi.amplitudes().end());
    ws.op_psi.resize(n);
    auto& out = psi.amplitudes();
    for (std::size_t l = 0; l < ops.size(); ++l) {
        const double e = kernels::pauli_expectation(ws.original, ops[l]);
        const double dxi = noise.draw(step_index, static_cast<uint32_t>(l));
        const double w_coeff = dxi + gamma * e * dt;
        const double id_coeff = -(dxi * e) - 0.5 * gamma * dt * (1.0 + e * e);
        kernels::pauli_apply(ws.original, ws.op_psi, ops[l]);
        for (std::size_t i = 0; i < n; ++i)
            out[i] += w_coeff * ws.op_psi[i] + id_coeff * ws.original[i];
    }
    psi.normalize();
}

}  // namespace spinmon
