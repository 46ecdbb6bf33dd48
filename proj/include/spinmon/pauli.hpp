#pragma once

// Pauli matrices and small dense helpers shared by the gate builders and the
// monitored-operator machinery.
//
// Basis conventions used everywhere in this library:
//   * site s in [0, L) is bit s of the basis index (site 0 = least
//     significant bit),
//   * bit value 0 means spin up (sigma^z eigenvalue +1), bit value 1 spin
//     down (-1),
//   * two-site matrices are ordered so the lower site is the faster index:
//     pair index = bit_s + 2 * bit_{s+1}.

#include <complex>

#include <Eigen/Dense>

namespace spinmon {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

enum class Axis { X, Y, Z };

inline char axis_char(Axis a) {
    switch (a) {
        case Axis::X: return 'x';
        case Axis::Y: return 'y';
        case Axis::Z: return 'z';
    }
    return '?';
}

inline Mat2 pauli(Axis a) {
    Mat2 m = Mat2::Zero();
    switch (a) {
        case Axis::X:
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case Axis::Y:
            m(0, 1) = cplx(0.0, -1.0);
            m(1, 0) = cplx(0.0, 1.0);
            break;
        case Axis::Z:
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
    }
    return m;
}

// kron(high, low): element ((il + 2 ih), (jl + 2 jh)) = high(ih, jh) * low(il, jl),
// i.e. `low` acts on the lower of the two adjacent sites.
inline Mat4 kron2(const Mat2& high, const Mat2& low) {
    Mat4 m;
    for (int ih = 0; ih < 2; ++ih)
        for (int il = 0; il < 2; ++il)
            for (int jh = 0; jh < 2; ++jh)
                for (int jl = 0; jl < 2; ++jl)
                    m(il + 2 * ih, jl + 2 * jh) = high(ih, jh) * low(il, jl);
    return m;
}

// sigma^a (x) sigma^a on an adjacent pair.
inline Mat4 pauli_pair(Axis a) {
    Mat2 s = pauli(a);
    return kron2(s, s);
}

}  // namespace spinmon
