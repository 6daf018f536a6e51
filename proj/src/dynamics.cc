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

#include "qfb/dynamics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qfb {

namespace {

constexpr Complex kI{0.0, 1.0};

template <typename Generator>
Mat2 rk4(Generator &&gen, double t0, double t1, double max_step) {
    Mat2 u = Mat2::Identity();
    double span = t1 - t0;
    if (span <= 0) {
        return u;
    }
    auto n = static_cast<long long>(std::ceil(span / max_step - 1e-9));
    n = std::max(n, 1LL);
    double h = span / static_cast<double>(n);
    for (long long k = 0; k < n; k++) {
        double t = t0 + static_cast<double>(k) * h;
        Mat2 k1 = gen(t) * u;
        Mat2 k2 = gen(t + h / 2) * (u + (h / 2) * k1);
        Mat2 k3 = gen(t + h / 2) * (u + (h / 2) * k2);
        Mat2 k4 = gen(t + h) * (u + h * k3);
        u += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return u;
}

}  // namespace

void DriveParams::validate() const {
    if (!(omega_qubit >= 0) || !(omega_drive >= 0) || !(rabi_omega >= 0)) {
        throw std::invalid_argument("DriveParams: frequencies must be non-negative");
    }
    if (!(start >= 0) || !(duration >= 0)) {
        throw std::invalid_argument("DriveParams: envelope start and duration must be non-negative");
    }
    if (!std::isfinite(drive_phase) || !std::isfinite(end())) {
        throw std::invalid_argument("DriveParams: values must be finite");
    }
}

IntegratorConfig::IntegratorConfig(double step) : step_(step) {
    if (!(step > 0) || !std::isfinite(step)) {
        throw std::invalid_argument("IntegratorConfig: step must be positive and finite");
    }
}

void IntegratorConfig::check_resolves(const DriveParams &p) const {
    double w_max = std::max({p.omega_qubit, p.omega_drive, p.rabi_omega});
    if (w_max == 0) {
        return;
    }
    double f_max = w_max / (2 * std::numbers::pi);
    double limit = 1.0 / (50.0 * f_max);
    if (step_ > limit * (1 + 1e-12)) {
        throw ConfigError("integrator step " + std::to_string(step_) + " s does not resolve the fastest frequency (" +
                          std::to_string(f_max) + " Hz); need step <= " + std::to_string(limit) + " s");
    }
}

Unitary2 lab_propagator(const DriveParams &p, const IntegratorConfig &cfg) {
    p.validate();
    cfg.check_resolves(p);

    // Interaction picture of H0 = omega_qubit sigma_z / 2 under dU/dt = +iHU:
    // U = U0(t) U_I(t), U0 = phase_z(t, omega_qubit),
    // dU_I/dt = i U0^dagger V U0 U_I, and U0^dagger sigma_x U0 has (g,e) entry e^{i omega_qubit t}.
    Mat2 u_int = Mat2::Identity();
    if (p.rabi_omega > 0 && p.duration > 0) {
        auto gen = [&](double t) {
            Complex coupling = p.rabi_omega * std::cos(p.omega_drive * t + p.drive_phase);
            Complex ge = std::polar(1.0, p.omega_qubit * t);
            Mat2 h;
            h << 0.0, coupling * ge, coupling * std::conj(ge), 0.0;
            return Mat2(kI * h);
        };
        u_int = reunitarize(rk4(gen, p.start, p.end(), cfg.step())).matrix();
    }
    return phase_z(p.end(), p.omega_qubit) * unitary_unchecked(u_int);
}

Unitary2 rwa_propagator(const RotatingFrameParams &p) {
    if (!(p.duration >= 0) || !std::isfinite(p.duration)) {
        throw std::invalid_argument("rwa_propagator: duration must be finite and non-negative");
    }
    // exp(i a n.sigma) = cos(a) I + i sin(a) n.sigma with a = t * |omega_vec| / 2.
    double cx = p.rabi_omega * std::cos(p.drive_phase);
    double cy = -p.rabi_omega * std::sin(p.drive_phase);
    double cz = p.detuning;
    double w = std::sqrt(cx * cx + cy * cy + cz * cz);
    if (w == 0 || p.duration == 0) {
        return Unitary2::identity();
    }
    double a = w * p.duration / 2;
    Mat2 n = (cx * pauli::x() + cy * pauli::y() + cz * pauli::z()) / w;
    return unitary_unchecked(std::cos(a) * Mat2::Identity() + kI * std::sin(a) * n);
}

Unitary2 rwa_propagator_numeric(const RotatingFrameParams &p, const IntegratorConfig &cfg) {
    Mat2 h = 0.5 * (p.detuning * pauli::z() + p.rabi_omega * std::cos(p.drive_phase) * pauli::x() -
                    p.rabi_omega * std::sin(p.drive_phase) * pauli::y());
    Mat2 gen_m = kI * h;
    return reunitarize(rk4([&](double) { return gen_m; }, 0.0, p.duration, cfg.step()));
}

Unitary2 to_drive_frame(const Unitary2 &lab, double omega_drive, double t) {
    // lab = W(t) U_rot with W(t) = exp(+i omega_drive t sigma_z / 2).
    return phase_z(t, omega_drive).adjoint() * lab;
}

double rwa_error(const DriveParams &p, const IntegratorConfig &cfg) {
    Unitary2 lab = lab_propagator(p, cfg);
    Unitary2 rot = to_drive_frame(lab, p.omega_drive, p.end());

    double detuning = p.omega_qubit - p.omega_drive;
    // In the drive frame the drive phase enters as e^{-i phi} on the (g,e) element.
    Unitary2 idle = rwa_propagator({.detuning = detuning, .rabi_omega = 0, .duration = p.start});
    Unitary2 pulse = rwa_propagator(
        {.detuning = detuning, .rabi_omega = p.rabi_omega, .duration = p.duration, .drive_phase = p.drive_phase});
    double err = 1.0 - average_gate_fidelity(pulse * idle, rot);
    return std::clamp(err, 0.0, 1.0);
}

}  // namespace qfb
