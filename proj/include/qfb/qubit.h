// Copyright 2026 The qfeedback Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QFB_QUBIT_H
#define QFB_QUBIT_H

#include <complex>

#include <Eigen/Dense>

namespace qfb {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

// Basis ordering is (|g>, |e>). |e> is the +1 eigenstate of sigma_z, so
// sigma_z = diag(-1, +1) and sigma_y = [[0, i], [-i, 0]] keeps the Pauli
// algebra right-handed (sigma_x sigma_y = i sigma_z).
namespace pauli {
Mat2 identity();
Mat2 x();
Mat2 y();
Mat2 z();
}  // namespace pauli

class Unitary2;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitarityTolerance = 1e-10;

/// Normalized two-level pure state. Compare states with fidelity(), never
/// componentwise: every protocol result is defined up to a global phase.
class PureState {
   public:
    /// Throws std::invalid_argument unless |g|^2 + |e|^2 = 1 within 1e-12 and
    /// both amplitudes are finite.
    PureState(Complex amp_g, Complex amp_e);

    /// Rescales (amp_g, amp_e) to unit norm. Throws on a zero or non-finite vector.
    static PureState normalized(Complex amp_g, Complex amp_e);
    static PureState ground();
    static PureState excited();
    /// cos(polar/2)|g> + e^{i azimuth} sin(polar/2)|e>.
    static PureState from_angles(double polar, double azimuth);

    Complex amp_g() const { return v_(0); }
    Complex amp_e() const { return v_(1); }
    const Vec2 &vector() const { return v_; }

    double prob_excited() const { return std::norm(v_(1)); }

   private:
    struct Unchecked {};
    PureState(Vec2 v, Unchecked) : v_(std::move(v)) {}
    friend PureState apply(const Unitary2 &u, const PureState &s);

    Vec2 v_;
};

/// 2x2 density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
   public:
    /// Throws std::invalid_argument if any invariant is violated beyond 1e-12.
    explicit DensityMatrix(const Mat2 &rho);
    static DensityMatrix from_pure(const PureState &s);
    static DensityMatrix maximally_mixed();

    const Mat2 &matrix() const { return rho_; }
    double prob_excited() const { return rho_(1, 1).real(); }

   private:
    Mat2 rho_;
};

class Unitary2 {
   public:
    /// Throws std::invalid_argument unless U^dagger U = I within 1e-10 (Frobenius).
    explicit Unitary2(const Mat2 &u);
    static Unitary2 identity();

    const Mat2 &matrix() const { return u_; }
    Unitary2 adjoint() const { return Unitary2(u_.adjoint(), Unchecked{}); }

    /// Matrix product; (a * b) applies b first.
    friend Unitary2 operator*(const Unitary2 &a, const Unitary2 &b) {
        return Unitary2(a.u_ * b.u_, Unchecked{});
    }

   private:
    struct Unchecked {};
    Unitary2(Mat2 u, Unchecked) : u_(std::move(u)) {}
    friend Unitary2 unitary_unchecked(const Mat2 &u);

    Mat2 u_;
};

struct BlochVector {
    double x = 0;
    double y = 0;
    double z = 0;

    double norm() const;
};

/// R(theta) = exp(i theta sigma_x / 2).
Unitary2 rot_x(double theta);

/// T(tau, delta_omega) = exp(i delta_omega tau sigma_z / 2). tau must be >= 0.
Unitary2 phase_z(double tau, double delta_omega);

PureState apply(const Unitary2 &u, const PureState &s);
DensityMatrix apply(const Unitary2 &u, const DensityMatrix &rho);

/// |<a|b>|^2.
double fidelity(const PureState &a, const PureState &b);

BlochVector to_bloch(const PureState &s);
BlochVector to_bloch(const DensityMatrix &rho);

/// Rotates a Bloch vector about +x by `angle` (right-hand rule).
BlochVector rotate_about_x(const BlochVector &v, double angle);

/// Average gate fidelity (|Tr(A^dagger B)|^2 + 2) / 6 between two qubit unitaries.
double average_gate_fidelity(const Unitary2 &a, const Unitary2 &b);

/// Wraps a matrix that the caller guarantees to be unitary, skipping the check.
Unitary2 unitary_unchecked(const Mat2 &u);

/// Projects a nearly-unitary matrix back onto U(2) by Gram-Schmidt on its columns.
Unitary2 reunitarize(const Mat2 &m);

}  // namespace qfb

#endif
