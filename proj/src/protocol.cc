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

#include "qfb/protocol.h"

#include <algorithm>
#include <cmath>

#include "qfb/dynamics.h"

namespace qfb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

bool close(double a, double b, double rel = 1e-9) {
    return std::abs(a - b) <= rel * std::max({1e-12, std::abs(a), std::abs(b)});
}

std::string event_label(size_t index, const PulseEvent &e) {
    return std::string(to_string(e.kind)) + " #" + std::to_string(index);
}

}  // namespace

void DeviceParams::validate() const {
    if (!(omega_qubit >= 0) || !std::isfinite(omega_qubit) || !(qubit_gap >= 0) || !std::isfinite(qubit_gap)) {
        throw std::invalid_argument("DeviceParams: qubit frequencies must be finite and non-negative");
    }
    if (!(rabi_omega > 0) || !std::isfinite(rabi_omega)) {
        throw std::invalid_argument("DeviceParams: rabi_omega must be positive");
    }
    jba.validate();
    decoherence().validate();
}

const char *to_string(DriveConvention c) {
    return c == DriveConvention::ResonantWithLow ? "resonant_with_low" : "resonant_with_high";
}

void FeedbackSpec::validate() const {
    if (!std::isfinite(theta1) || !std::isfinite(theta2) || !std::isfinite(phi)) {
        throw std::invalid_argument("FeedbackSpec: angles must be finite");
    }
    if (delta_omega == 0 || !std::isfinite(delta_omega)) {
        throw std::invalid_argument("FeedbackSpec: delta_omega must be finite and nonzero");
    }
}

const char *to_string(EventKind k) {
    switch (k) {
        case EventKind::XRotation:
            return "pulse";
        case EventKind::Wait:
            return "wait";
        case EventKind::ReadoutOn:
            return "readout-on";
        case EventKind::ReadoutOff:
            return "readout-off";
        case EventKind::Measure:
            return "measure";
    }
    return "?";
}

PulseSchedule::PulseSchedule(std::vector<PulseEvent> events, DeviceParams device, DriveConvention convention)
    : events_(std::move(events)), device_(std::move(device)), convention_(convention) {
    validate();
}

void PulseSchedule::validate() const {
    device_.validate();
    const double tau_jba = device_.jba.tau_jba();
    const double tol = 1e-15;

    bool open = false;
    std::optional<size_t> last_timed;
    for (size_t k = 0; k < events_.size(); k++) {
        const PulseEvent &e = events_[k];
        if (!std::isfinite(e.start) || !(e.start >= 0) || !std::isfinite(e.duration) || !(e.duration >= 0)) {
            throw ScheduleError(event_label(k, e) + ": start and duration must be finite and non-negative", {k});
        }
        if (k > 0 && e.start < events_[k - 1].start - tol) {
            throw ScheduleError(event_label(k, e) + " starts before the preceding event", {k - 1, k});
        }
        if (last_timed && e.start < events_[*last_timed].end() - tol) {
            throw ScheduleError(event_label(k, e) + " overlaps " + event_label(*last_timed, events_[*last_timed]),
                                {*last_timed, k});
        }
        if (e.duration > 0 && (!last_timed || e.end() > events_[*last_timed].end())) {
            last_timed = k;
        }

        switch (e.kind) {
            case EventKind::XRotation:
                if (!std::isfinite(e.angle)) {
                    throw ScheduleError(event_label(k, e) + ": rotation angle must be finite", {k});
                }
                if (!close(e.duration, std::abs(e.angle) / device_.rabi_omega)) {
                    throw ScheduleError(event_label(k, e) + ": duration does not match |angle| / rabi_omega", {k});
                }
                break;
            case EventKind::Wait:
                if (e.selective && !open) {
                    throw ScheduleError(event_label(k, e) + ": selective wait outside a readout window", {k});
                }
                break;
            case EventKind::ReadoutOn:
                if (open) {
                    throw ScheduleError(event_label(k, e) + ": readout is already on", {k});
                }
                if (!close(e.duration, tau_jba)) {
                    throw ScheduleError(event_label(k, e) + ": readout latch window must last tau_jba", {k});
                }
                open = true;
                break;
            case EventKind::ReadoutOff:
                if (!open) {
                    throw ScheduleError(event_label(k, e) + ": readout is not on", {k});
                }
                open = false;
                break;
            case EventKind::Measure:
                if (!open) {
                    throw ScheduleError(event_label(k, e) + ": measure outside a readout window", {k});
                }
                break;
        }
    }
}

double PulseSchedule::total_duration() const {
    double end = 0;
    for (const auto &e : events_) {
        end = std::max(end, e.end());
    }
    return end;
}

bool PulseSchedule::approx_equal(const PulseSchedule &other, double tol) const {
    if (convention_ != other.convention_ || events_.size() != other.events_.size()) {
        return false;
    }
    auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); };
    for (size_t k = 0; k < events_.size(); k++) {
        const auto &a = events_[k];
        const auto &b = other.events_[k];
        // Times are compared in ns so the tolerance is meaningful.
        if (a.kind != b.kind || a.selective != b.selective || !near(a.start * 1e9, b.start * 1e9) ||
            !near(a.duration * 1e9, b.duration * 1e9) || !near(a.angle, b.angle)) {
            return false;
        }
    }
    return true;
}

ScheduleBuilder &ScheduleBuilder::rotate(double angle) {
    double d = std::abs(angle) / device_.rabi_omega;
    events_.push_back({.kind = EventKind::XRotation, .start = now_, .duration = d, .angle = angle});
    now_ += d;
    return *this;
}

ScheduleBuilder &ScheduleBuilder::wait(double duration, bool selective) {
    events_.push_back({.kind = EventKind::Wait, .start = now_, .duration = duration, .selective = selective});
    now_ += duration;
    return *this;
}

ScheduleBuilder &ScheduleBuilder::readout_on() {
    double d = device_.jba.tau_jba();
    events_.push_back({.kind = EventKind::ReadoutOn, .start = now_, .duration = d});
    now_ += d;
    return *this;
}

ScheduleBuilder &ScheduleBuilder::readout_off() {
    events_.push_back({.kind = EventKind::ReadoutOff, .start = now_});
    return *this;
}

ScheduleBuilder &ScheduleBuilder::measure() {
    events_.push_back({.kind = EventKind::Measure, .start = now_});
    return *this;
}

PulseSchedule build_arbitrary_prep(const FeedbackSpec &spec, const DeviceParams &device) {
    spec.validate();
    if (spec.delta_omega < 0) {
        throw std::invalid_argument("build_arbitrary_prep: delta_omega must be positive");
    }
    if (spec.phi < 0) {
        throw std::invalid_argument("build_arbitrary_prep: phi must be non-negative");
    }
    DeviceParams dev = device;
    dev.jba.delta_high = dev.jba.delta_low + spec.delta_omega;

    const double quarter = (kPi / 2) / spec.delta_omega;
    ScheduleBuilder b(dev);
    b.readout_on()
        .rotate(kPi / 2)
        .wait(quarter, true)
        .rotate(spec.theta1 - spec.theta2)
        .wait(quarter, true)
        .rotate(spec.theta2 - kPi / 2)
        .wait(spec.phi / spec.delta_omega, true)
        .readout_off();
    return PulseSchedule(b.take(), dev, spec.drive_convention);
}

PulseSchedule build_initialization(const DeviceParams &device, double delta_omega) {
    return build_arbitrary_prep({.theta1 = kPi, .theta2 = kPi, .phi = 0, .delta_omega = delta_omega}, device);
}

double conditional_control_time(const DeviceParams &device, double delta_omega) {
    return device.jba.tau_jba() + kPi / delta_omega;
}

PureState predict_final(Branch branch, const FeedbackSpec &spec) {
    spec.validate();
    if (branch == Branch::GroundDetected) {
        return PureState::normalized(std::cos(spec.theta1 / 2), kI * std::sin(spec.theta1 / 2));
    }
    return PureState::normalized(std::cos(spec.theta2 / 2), kI * std::sin(spec.theta2 / 2) * std::polar(1.0, spec.phi));
}

namespace {

PureState evolve(const Unitary2 &u, const PureState &s) {
    return apply(u, s);
}

DensityMatrix evolve(const Unitary2 &u, const DensityMatrix &rho) {
    return apply(u, rho);
}

PureState decohere(const PureState &s, double, const DecoherenceParams *) {
    return s;
}

DensityMatrix decohere(const DensityMatrix &rho, double dt, const DecoherenceParams *noise) {
    return noise ? apply_decoherence(rho, dt, *noise) : rho;
}

PureState from_post(const PureState &s, const PureState *) {
    return s;
}

DensityMatrix from_post(const PureState &s, const DensityMatrix *) {
    return DensityMatrix::from_pure(s);
}

template <typename State>
ShotResult<State> execute(const PulseSchedule &sched, const State &initial, RandomSource &rng,
                          const SimOptions &options, const DecoherenceParams *noise) {
    const DeviceParams &dev = sched.device();
    const double offset =
        sched.convention() == DriveConvention::ResonantWithLow ? dev.jba.delta_low : dev.jba.delta_high;

    ShotResult<State> out{.readouts = {}, .measured = std::nullopt, .final_state = initial};
    State &state = out.final_state;
    double shift = 0;
    double now = 0;

    auto free_evolve = [&](double dt) {
        if (dt <= 0) {
            return;
        }
        state = evolve(phase_z(dt, shift - offset), state);
        state = decohere(state, dt, noise);
    };

    for (const PulseEvent &e : sched.events()) {
        free_evolve(e.start - now);
        now = std::max(now, e.start);
        switch (e.kind) {
            case EventKind::ReadoutOn: {
                // Unshifted until the amplifier latches at readout-on + tau_jba.
                shift = 0;
                free_evolve(e.duration);
                MeasurementRecord rec = project(state, dev.jba, rng);
                state = from_post(rec.post_state, static_cast<const State *>(nullptr));
                shift = rec.stark_shift;
                out.readouts.push_back(std::move(rec));
                break;
            }
            case EventKind::ReadoutOff:
                shift = 0;
                break;
            case EventKind::Wait:
                free_evolve(e.duration);
                break;
            case EventKind::XRotation:
                if (options.mode == PulseMode::Instantaneous) {
                    state = evolve(rot_x(e.angle), state);
                } else {
                    RotatingFrameParams rp{
                        .detuning = shift - offset,
                        .rabi_omega = dev.rabi_omega,
                        .duration = e.duration,
                        .drive_phase = e.angle < 0 ? kPi : 0.0,
                    };
                    state = evolve(rwa_propagator(rp), state);
                    state = decohere(state, e.duration, noise);
                }
                break;
            case EventKind::Measure:
                out.measured = out.readouts.size() - 1;
                break;
        }
        now = std::max(now, e.end());
    }
    return out;
}

}  // namespace

ShotResult<PureState> simulate_schedule(const PulseSchedule &s, const PureState &initial, RandomSource &rng,
                                        const SimOptions &options) {
    return execute(s, initial, rng, options, nullptr);
}

ShotResult<DensityMatrix> simulate_schedule(const PulseSchedule &s, const DensityMatrix &initial, RandomSource &rng,
                                            const SimOptions &options, const DecoherenceParams &noise) {
    noise.validate();
    return execute(s, initial, rng, options, noise.enabled() ? &noise : nullptr);
}

FeedforwardResult two_qubit_feedforward(const PureState &control, const FeedforwardSpec &spec,
                                        const DeviceParams &device, RandomSource &rng) {
    device.validate();
    if (!std::isfinite(spec.theta_target) || !std::isfinite(spec.delta_omega)) {
        throw std::invalid_argument("two_qubit_feedforward: spec values must be finite");
    }
    MeasurementRecord rec = project(control, device.jba, rng);
    PureState target = PureState::ground();
    if (rec.outcome == Outcome::High) {
        target = apply(rot_x(spec.theta_target), target);
    } else {
        RotatingFrameParams rp{
            .detuning = -spec.delta_omega,
            .rabi_omega = device.rabi_omega,
            .duration = std::abs(spec.theta_target) / device.rabi_omega,
            .drive_phase = spec.theta_target < 0 ? kPi : 0.0,
        };
        target = apply(rwa_propagator(rp), target);
    }
    return FeedforwardResult{.control = std::move(rec), .target = target};
}

}  // namespace qfb
