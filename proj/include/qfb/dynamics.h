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

#ifndef QFB_DYNAMICS_H
#define QFB_DYNAMICS_H

#include "qfb/errors.h"
#include "qfb/qubit.h"

namespace qfb {

/// Lab-frame drive H(t) = (omega_qubit/2) sigma_z + rabi_omega sigma_x cos(omega_drive t + drive_phase),
/// with the drive switched on for t in [start, start + duration). All rates in rad/s.
struct DriveParams {
    double omega_qubit = 0;
    double omega_drive = 0;
    double rabi_omega = 0;
    double drive_phase = 0;
    double start = 0;
    double duration = 0;

    /// End of the propagation window (start + duration).
    double end() const { return start + duration; }
    void validate() const;
};

/// Fixed-step classical RK4.
class IntegratorConfig {
   public:
    /// Throws std::invalid_argument for a non-positive step.
    explicit IntegratorConfig(double step);
    double step() const { return step_; }

    /// ConfigError unless step <= 1 / (50 * f_max), f_max the largest rate of `p` in Hz.
    void check_resolves(const DriveParams &p) const;

   private:
    double step_;
};

inline constexpr double kDefaultIntegratorStep = 1e-12;

/// Rotating-frame Hamiltonian (detuning sigma_z + rabi_omega (cos(phi) sigma_x - sin(phi) sigma_y)) / 2.
/// A drive phase of pi implements a rotation by a negative angle.
struct RotatingFrameParams {
    double detuning = 0;
    double rabi_omega = 0;
    double duration = 0;
    double drive_phase = 0;
};

/// Time-ordered propagator of the full lab-frame Hamiltonian from t = 0 to p.end().
/// Integrated in the interaction picture of the bare qubit term, so the drive-free
/// case reduces to phase_z(t, omega_qubit) exactly. Follows the +i exponent
/// convention of rot_x / phase_z: dU/dt = +i H(t) U.
Unitary2 lab_propagator(const DriveParams &p, const IntegratorConfig &cfg);

/// Closed form exp(i t (detuning sigma_z + rabi_omega n.sigma) / 2).
Unitary2 rwa_propagator(const RotatingFrameParams &p);

/// Same as rwa_propagator, but by RK4 integration of the constant Hamiltonian.
/// Used to cross-check the closed form.
Unitary2 rwa_propagator_numeric(const RotatingFrameParams &p, const IntegratorConfig &cfg);

/// Moves a lab-frame propagator at time t into the frame rotating at omega_drive.
Unitary2 to_drive_frame(const Unitary2 &lab, double omega_drive, double t);

/// 1 - average gate fidelity between the frame-aligned lab propagator and the
/// rotating-wave propagator for the same window.
double rwa_error(const DriveParams &p, const IntegratorConfig &cfg);

}  // namespace qfb

#endif
