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

#include "qfb/qubit.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace qfb {

namespace {

constexpr Complex kI{0.0, 1.0};

bool finite(Complex c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
}

}  // namespace

namespace pauli {

Mat2 identity() {
    return Mat2::Identity();
}

Mat2 x() {
    Mat2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Mat2 y() {
    Mat2 m;
    m << 0.0, kI, -kI, 0.0;
    return m;
}

Mat2 z() {
    Mat2 m;
    m << -1.0, 0.0, 0.0, 1.0;
    return m;
}

}  // namespace pauli

PureState::PureState(Complex amp_g, Complex amp_e) : v_(amp_g, amp_e) {
    if (!finite(amp_g) || !finite(amp_e)) {
        throw std::invalid_argument("PureState amplitudes must be finite");
    }
    double n = std::norm(amp_g) + std::norm(amp_e);
    if (std::abs(n - 1.0) > kNormTolerance) {
        throw std::invalid_argument("PureState is not normalized (|g|^2+|e|^2 = " + std::to_string(n) + ")");
    }
}

PureState PureState::normalized(Complex amp_g, Complex amp_e) {
    if (!finite(amp_g) || !finite(amp_e)) {
        throw std::invalid_argument("PureState amplitudes must be finite");
    }
    double n = std::sqrt(std::norm(amp_g) + std::norm(amp_e));
    if (n == 0.0) {
        throw std::invalid_argument("cannot normalize the zero vector");
    }
    return PureState(Vec2(amp_g / n, amp_e / n), Unchecked{});
}

PureState PureState::ground() {
    return PureState(1.0, 0.0);
}

PureState PureState::excited() {
    return PureState(0.0, 1.0);
}

PureState PureState::from_angles(double polar, double azimuth) {
    return normalized(std::cos(polar / 2), std::polar(std::sin(polar / 2), azimuth));
}

DensityMatrix::DensityMatrix(const Mat2 &rho) : rho_(rho) {
    for (int i = 0; i < 4; i++) {
        if (!finite(rho(i))) {
            throw std::invalid_argument("density matrix entries must be finite");
        }
    }
    if ((rho - rho.adjoint()).norm() > kNormTolerance) {
        throw std::invalid_argument("density matrix is not Hermitian");
    }
    if (std::abs(rho.trace() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Mat2> eig(rho, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kNormTolerance) {
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::from_pure(const PureState &s) {
    Mat2 rho = s.vector() * s.vector().adjoint();
    return DensityMatrix(Mat2(0.5 * (rho + rho.adjoint())));
}

DensityMatrix DensityMatrix::maximally_mixed() {
    return DensityMatrix(Mat2(0.5 * Mat2::Identity()));
}

Unitary2::Unitary2(const Mat2 &u) : u_(u) {
    for (int i = 0; i < 4; i++) {
        if (!finite(u(i))) {
            throw std::invalid_argument("unitary entries must be finite");
        }
    }
    if ((u.adjoint() * u - Mat2::Identity()).norm() > kUnitarityTolerance) {
        throw std::invalid_argument("matrix is not unitary");
    }
}

Unitary2 Unitary2::identity() {
    return Unitary2(Mat2::Identity(), Unchecked{});
}

Unitary2 unitary_unchecked(const Mat2 &u) {
    return Unitary2(u, Unitary2::Unchecked{});
}

Unitary2 reunitarize(const Mat2 &m) {
    Vec2 c0 = m.col(0);
    c0 /= c0.norm();
    Vec2 c1 = m.col(1);
    c1 -= c0.dot(c1) * c0;
    c1 /= c1.norm();
    Mat2 u;
    u.col(0) = c0;
    u.col(1) = c1;
    return Unitary2(u);
}

double BlochVector::norm() const {
    return std::sqrt(x * x + y * y + z * z);
}

Unitary2 rot_x(double theta) {
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("rot_x: angle must be finite");
    }
    double c = std::cos(theta / 2);
    Complex s = kI * std::sin(theta / 2);
    Mat2 m;
    m << c, s, s, c;
    return unitary_unchecked(m);
}

Unitary2 phase_z(double tau, double delta_omega) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("phase_z: duration must be finite and non-negative");
    }
    if (!std::isfinite(delta_omega)) {
        throw std::invalid_argument("phase_z: detuning must be finite");
    }
    // sigma_z = diag(-1, +1).
    double half = delta_omega * tau / 2;
    Mat2 m;
    m << std::polar(1.0, -half), 0.0, 0.0, std::polar(1.0, half);
    return unitary_unchecked(m);
}

PureState apply(const Unitary2 &u, const PureState &s) {
    return PureState(u.matrix() * s.vector(), PureState::Unchecked{});
}

DensityMatrix apply(const Unitary2 &u, const DensityMatrix &rho) {
    Mat2 out = u.matrix() * rho.matrix() * u.matrix().adjoint();
    return DensityMatrix(Mat2(0.5 * (out + out.adjoint())));
}

double fidelity(const PureState &a, const PureState &b) {
    return std::min(1.0, std::norm(a.vector().dot(b.vector())));
}

BlochVector to_bloch(const PureState &s) {
    return to_bloch(DensityMatrix::from_pure(s));
}

BlochVector to_bloch(const DensityMatrix &rho) {
    const Mat2 &m = rho.matrix();
    return BlochVector{
        (pauli::x() * m).trace().real(),
        (pauli::y() * m).trace().real(),
        (pauli::z() * m).trace().real(),
    };
}

BlochVector rotate_about_x(const BlochVector &v, double angle) {
    double c = std::cos(angle);
    double s = std::sin(angle);
    return BlochVector{v.x, c * v.y - s * v.z, s * v.y + c * v.z};
}

double average_gate_fidelity(const Unitary2 &a, const Unitary2 &b) {
    Complex tr = (a.matrix().adjoint() * b.matrix()).trace();
    return (std::norm(tr) + 2.0) / 6.0;
}

}  // namespace qfb
