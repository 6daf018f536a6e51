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

#ifndef QFB_PROTOCOL_H
#define QFB_PROTOCOL_H

#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfb/jba.h"
#include "qfb/noise.h"
#include "qfb/qubit.h"
#include "qfb/random.h"

namespace qfb {

namespace defaults {
inline constexpr double kOmegaQubit = kTwoPi * 3.4e9;
inline constexpr double kQubitGap = kTwoPi * 3.3e9;
/// Rabi pi-pulse length fitted from the initialization-map anchors.
inline constexpr double kPiDuration = 0.9e-9;
inline constexpr double kRabiOmega = std::numbers::pi / kPiDuration;
/// Shift difference seen in Ramsey fringes during readout (150 MHz).
inline constexpr double kRamseyShift = kTwoPi * 150e6;
/// Shift difference implied by a 5.5 ns selective pi rotation (about 90.9 MHz).
inline constexpr double kInitShift = std::numbers::pi / 5.5e-9;
}  // namespace defaults

struct DeviceParams {
    double omega_qubit = defaults::kOmegaQubit;
    double qubit_gap = defaults::kQubitGap;
    double rabi_omega = defaults::kRabiOmega;
    JbaParams jba;
    std::optional<double> t1;
    std::optional<double> t2;

    DecoherenceParams decoherence() const { return {t1, t2}; }
    void validate() const;
};

/// Which latched branch the control drive is tuned to.
enum class DriveConvention { ResonantWithLow, ResonantWithHigh };

const char *to_string(DriveConvention c);

/// Target state parameters: ground detection ends in cos(theta1/2)|g> + i sin(theta1/2)|e>,
/// excited detection in cos(theta2/2)|g> + i sin(theta2/2) e^{i phi}|e>.
struct FeedbackSpec {
    double theta1 = 0;
    double theta2 = 0;
    double phi = 0;
    /// Stark shift difference between the High and Low latch, rad/s.
    double delta_omega = defaults::kInitShift;
    DriveConvention drive_convention = DriveConvention::ResonantWithLow;

    void validate() const;
};

enum class EventKind { XRotation, Wait, ReadoutOn, ReadoutOff, Measure };

const char *to_string(EventKind k);

struct PulseEvent {
    EventKind kind = EventKind::Wait;
    double start = 0;
    double duration = 0;
    /// Rotation angle, XRotation only.
    double angle = 0;
    /// Wait only: must lie inside a latched readout window.
    bool selective = false;

    double end() const { return start + duration; }
    bool operator==(const PulseEvent &) const = default;
};

/// Rejected schedule; `events` are the indices of the offending events.
class ScheduleError : public std::invalid_argument {
   public:
    ScheduleError(const std::string &message, std::vector<size_t> events)
        : std::invalid_argument(message), events_(std::move(events)) {}
    const std::vector<size_t> &events() const { return events_; }

   private:
    std::vector<size_t> events_;
};

/// Time-ordered control and readout program. Validated on construction:
///   - events sorted by start, no event with a duration overlaps another;
///   - ReadoutOn lasts exactly tau_jba (the latch window), readouts do not nest,
///     ReadoutOff needs an open readout;
///   - Measure and selective Waits lie inside a latched readout window;
///   - XRotation duration equals |angle| / rabi_omega.
class PulseSchedule {
   public:
    PulseSchedule(std::vector<PulseEvent> events, DeviceParams device,
                  DriveConvention convention = DriveConvention::ResonantWithLow);

    const std::vector<PulseEvent> &events() const { return events_; }
    const DeviceParams &device() const { return device_; }
    DriveConvention convention() const { return convention_; }

    double total_duration() const;

    /// Structural comparison of events (kinds exact, times and angles within tol)
    /// and of the drive convention.
    bool approx_equal(const PulseSchedule &other, double tol = 1e-12) const;

   private:
    void validate() const;

    std::vector<PulseEvent> events_;
    DeviceParams device_;
    DriveConvention convention_;
};

/// Appends events back to back, the way the builders and the DSL lowering lay out time.
class ScheduleBuilder {
   public:
    explicit ScheduleBuilder(const DeviceParams &device) : device_(device) {}

    ScheduleBuilder &rotate(double angle);
    ScheduleBuilder &wait(double duration, bool selective = false);
    ScheduleBuilder &readout_on();
    ScheduleBuilder &readout_off();
    ScheduleBuilder &measure();

    double now() const { return now_; }
    std::vector<PulseEvent> take() { return std::move(events_); }

   private:
    const DeviceParams &device_;
    std::vector<PulseEvent> events_;
    double now_ = 0;
};

/// Readout on; R(pi/2); wait (pi/2)/dw; R(theta1-theta2); wait (pi/2)/dw;
/// R(theta2-pi/2); wait phi/dw; readout off. Waits are edge to edge and
/// selective. The schedule's device copy gets delta_high = delta_low + spec.delta_omega.
PulseSchedule build_arbitrary_prep(const FeedbackSpec &spec, const DeviceParams &device);

/// build_arbitrary_prep with theta1 = theta2 = pi, phi = 0: every input ends in |e>.
PulseSchedule build_initialization(const DeviceParams &device, double delta_omega = defaults::kInitShift);

/// Measurement + bifurcation latch + selective rotation time of the initialization preset.
double conditional_control_time(const DeviceParams &device, double delta_omega = defaults::kInitShift);

enum class Branch { GroundDetected, ExcitedDetected };

/// Closed-form final state of the arbitrary-preparation sequence on each branch.
PureState predict_final(Branch branch, const FeedbackSpec &spec);

enum class PulseMode {
    /// Rotations act as ideal rot_x(angle); no detuning phase during pulses.
    Instantaneous,
    /// Rotations run as detuned rectangular pulses for angle / rabi_omega.
    FiniteDuration,
};

struct SimOptions {
    PulseMode mode = PulseMode::Instantaneous;
};

template <typename State>
struct ShotResult {
    /// One record per ReadoutOn, in time order.
    std::vector<MeasurementRecord> readouts;
    /// Index into readouts of the window a Measure event reported.
    std::optional<size_t> measured;
    State final_state;

    const MeasurementRecord &feedback() const { return readouts.at(0); }
    std::optional<Outcome> measured_outcome() const {
        if (!measured) {
            return std::nullopt;
        }
        return readouts[*measured].outcome;
    }
};

/// Executes a schedule on a pure state. Each ReadoutOn projects the qubit at
/// readout-on + tau_jba and latches the matching Stark shift until ReadoutOff.
/// Free evolution uses phase_z with detuning (shift - drive offset), rotations
/// use rot_x or rwa_propagator depending on options.mode.
ShotResult<PureState> simulate_schedule(const PulseSchedule &s, const PureState &initial, RandomSource &rng,
                                        const SimOptions &options = {});

/// Density-matrix execution with coarse-grained decoherence after every timed segment.
ShotResult<DensityMatrix> simulate_schedule(const PulseSchedule &s, const DensityMatrix &initial, RandomSource &rng,
                                            const SimOptions &options, const DecoherenceParams &noise);

/// Feed-forward from a measured control qubit to a separate target qubit.
struct FeedforwardSpec {
    /// Rotation applied to the target when the control latches High.
    double theta_target = std::numbers::pi;
    double delta_omega = defaults::kInitShift;
};

struct FeedforwardResult {
    MeasurementRecord control;
    PureState target;
};

/// The target starts in |g> and is driven at the High-latch frequency for
/// theta_target / rabi_omega: resonant on High, detuned by -delta_omega on Low.
/// Product-state model; the control only routes a classical outcome.
FeedforwardResult two_qubit_feedforward(const PureState &control, const FeedforwardSpec &spec,
                                        const DeviceParams &device, RandomSource &rng);

}  // namespace qfb

#endif
