#pragma once

// Generalized Heisenberg chain
//
//   H = sum_{bonds (l,l+1)} [ Jx XX + Jy YY + Jz ZZ ] + hz sum_l (-1)^l Z_l
//
// on L spins with open boundaries (L-1 bonds), plus the monitored-operator
// sets and the interaction / integrability / U(1) classification of a
// (model, monitor) setup.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinmon/pauli.hpp"

namespace spinmon {

struct ModelSpec {
    int L = 0;           // spin count, even, >= 2
    double Jx = 1.0;     // reference energy scale
    double Jy = 1.0;
    double Jz = 0.0;
    double hz = 0.0;     // staggered field amplitude
    std::string name = "custom";  // preset label, used in reports

    // Staggered-field sign of site s (0-based): the conventional 1-based
    // (-1)^l alternation, so the first site carries the negative sign.
    static double stagger_sign(int site) { return (site % 2 == 0) ? -1.0 : 1.0; }

    int bond_count() const { return L - 1; }

    void validate() const {
        if (L < 2) throw std::invalid_argument("L must be >= 2");
        if (L % 2 != 0) throw std::invalid_argument("L must be even (half-chain cut)");
        if (!std::isfinite(Jx) || !std::isfinite(Jy) || !std::isfinite(Jz) || !std::isfinite(hz))
            throw std::invalid_argument("couplings must be finite");
    }
};

enum class MonitorKind { SingleSite, Bond };

struct MonitorSpec {
    MonitorKind kind = MonitorKind::SingleSite;
    Axis axis = Axis::Z;
    double gamma = 0.1;  // measurement rate, >= 0

    void validate() const {
        if (!(gamma >= 0.0)) throw std::invalid_argument("measurement rate must be >= 0");
    }

    std::string label() const {
        std::string k = (kind == MonitorKind::SingleSite) ? "site" : "bond";
        return k + "-" + axis_char(axis);
    }
};

struct SetupClass {
    bool interacting = false;   // setup level: Hamiltonian or monitor induced
    bool integrable = false;    // Hamiltonian only: hz == 0
    bool u1_symmetric = false;  // Jx == Jy and z-axis monitors
};

// One monitored operator O_l: an involutory Pauli (product) on one site or
// an adjacent pair.
struct PauliOp {
    Axis axis = Axis::Z;
    int site = 0;       // lower site
    bool bond = false;  // true: acts on (site, site+1)

    std::string label() const {
        char a = axis_char(axis);
        if (!bond) return std::string(1, a) + std::to_string(site + 1);
        return std::string(1, a) + std::to_string(site + 1) + a + std::to_string(site + 2);
    }
};

// ---------------------------------------------------------------------------
// presets

// Named presets. Only the defining constraints come from the model family;
// the numeric anisotropies are library defaults (Jy = 0.5 when Jx != Jy,
// Jz = 0.5 when nonzero, hz = 0.5 when nonzero) and can be overridden.
inline ModelSpec preset(const std::string& name, int L) {
    if (L % 2 != 0 || L < 4)
        throw std::invalid_argument("preset: L must be even and >= 4");
    ModelSpec m;
    m.L = L;
    m.name = name;
    if (name == "XX") {
        m.Jy = 1.0;
    } else if (name == "XY") {
        m.Jy = 0.5;
    } else if (name == "XXZ") {
        m.Jy = 1.0;
        m.Jz = 0.5;
    } else if (name == "XYZ") {
        m.Jy = 0.5;
        m.Jz = 0.5;
    } else if (name == "XXZz") {
        m.Jy = 1.0;
        m.Jz = 0.5;
        m.hz = 0.5;
    } else if (name == "XYZz") {
        m.Jy = 0.5;
        m.Jz = 0.5;
        m.hz = 0.5;
    } else {
        throw std::invalid_argument("unknown model preset: " + name);
    }
    m.validate();
    return m;
}

// Re-check a preset's defining constraints, e.g. after coupling overrides.
inline void validate_preset_constraints(const ModelSpec& m) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("preset " + m.name + " requires " + what);
    };
    bool xy_equal = (m.Jx == m.Jy);
    if (m.name == "XX") {
        if (!xy_equal) fail("Jx == Jy");
        if (m.Jz != 0.0) fail("Jz == 0");
        if (m.hz != 0.0) fail("hz == 0");
    } else if (m.name == "XY") {
        if (xy_equal) fail("Jx != Jy");
        if (m.Jz != 0.0) fail("Jz == 0");
        if (m.hz != 0.0) fail("hz == 0");
    } else if (m.name == "XXZ") {
        if (!xy_equal) fail("Jx == Jy");
        if (m.Jz == 0.0) fail("Jz != 0");
        if (m.hz != 0.0) fail("hz == 0");
    } else if (m.name == "XYZ") {
        if (xy_equal) fail("Jx != Jy");
        if (m.Jz == 0.0) fail("Jz != 0");
        if (m.hz != 0.0) fail("hz == 0");
    } else if (m.name == "XXZz") {
        if (!xy_equal) fail("Jx == Jy");
        if (m.Jz == 0.0) fail("Jz != 0");
        if (m.hz == 0.0) fail("hz != 0");
    } else if (m.name == "XYZz") {
        if (xy_equal) fail("Jx != Jy");
        if (m.Jz == 0.0) fail("Jz != 0");
        if (m.hz == 0.0) fail("hz != 0");
    }
    // "custom" carries no constraints.
}

// ---------------------------------------------------------------------------
// classification

inline bool hamiltonian_interacting(const ModelSpec& m) { return m.Jz != 0.0; }
inline bool hamiltonian_integrable(const ModelSpec& m) { return m.hz == 0.0; }

// Setup-level interaction. A Jz = 0 chain maps to free fermions, and the
// dynamics stays Gaussian only for monitors that are quadratic in those
// fermions: single-site z, or bond xx on an anisotropic (Jx != Jy) chain.
// Everything else (bond zz, single-site x on XY, ...) induces interactions.
inline SetupClass classify(const ModelSpec& model, const MonitorSpec& monitor) {
    SetupClass c;
    bool gaussian_monitor =
        (monitor.kind == MonitorKind::SingleSite && monitor.axis == Axis::Z) ||
        (monitor.kind == MonitorKind::Bond && monitor.axis == Axis::X && model.Jx != model.Jy);
    c.interacting = hamiltonian_interacting(model) || !gaussian_monitor;
    c.integrable = hamiltonian_integrable(model);
    c.u1_symmetric = (model.Jx == model.Jy) && (monitor.axis == Axis::Z);
    return c;
}

// ---------------------------------------------------------------------------
// monitored operators

// Materialize {O_l}: L single-site operators or L-1 bond operators.
inline std::vector<PauliOp> monitored_operators(const ModelSpec& model,
                                                const MonitorSpec& monitor) {
    std::vector<PauliOp> ops;
    if (monitor.kind == MonitorKind::SingleSite) {
        ops.reserve(model.L);
        for (int s = 0; s < model.L; ++s)
            ops.push_back({monitor.axis, s, false});
    } else {
        ops.reserve(model.L - 1);
        for (int s = 0; s + 1 < model.L; ++s)
            ops.push_back({monitor.axis, s, true});
    }
    return ops;
}

// Dense representation of one monitor operator (2x2 or 4x4), used by gate
// application and by the involution checks in tests.
inline Mat2 dense_op1(const PauliOp& op) { return pauli(op.axis); }
inline Mat4 dense_op2(const PauliOp& op) { return pauli_pair(op.axis); }

}  // namespace spinmon
