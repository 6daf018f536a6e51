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

#ifndef QFB_HARNESS_H
#define QFB_HARNESS_H

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfb/noise.h"
#include "qfb/protocol.h"

namespace qfb {

struct SweepAxis {
    std::string name;
    double start = 0;
    double stop = 0;
    double step = 1;

    void validate() const;
    /// start, start + step, ... up to stop (inclusive within 1e-9 of a step).
    std::vector<double> values() const;
};

struct SweepSpec {
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
    uint64_t shots_per_point = 1000;
    uint64_t seed = 0;

    void validate() const;
};

struct HarnessOptions {
    PulseMode mode = PulseMode::Instantaneous;
    /// Worker threads; results do not depend on this.
    unsigned workers = 1;
};

/// P(e) on a (tau1, tau2) grid, row-major: p_excited[i * tau2.size() + j].
struct GridResult {
    std::vector<double> tau1;
    std::vector<double> tau2;
    std::vector<double> p_excited;
    uint64_t shots = 0;

    double at(size_t i, size_t j) const { return p_excited[i * tau2.size() + j]; }
    std::vector<double> row(size_t i) const;
    std::vector<double> column(size_t j) const;

    /// Header `tau1_ns,tau2_ns,p_excited,shots`, one row per cell, 9 significant digits, LF.
    void write_csv(std::ostream &out) const;
    std::string to_csv() const;
};

/// Runs fn(cell) for cell in [0, n) on `workers` threads. fn must be independent per cell.
std::vector<double> run_cells(size_t n, unsigned workers, const std::function<double(size_t)> &fn);

// ---------------------------------------------------------------------------
// Rabi calibration

struct RabiCalibration {
    double pi_duration = defaults::kPiDuration;
    double time_offset = 0.8e-9;

    /// Rotation angle produced by a prep pulse of width tau (zero below the offset).
    double angle(double tau) const;
    /// sin^2(pi (tau - t0) / (2 pi_duration)).
    double p_excited(double tau) const;
};

/// Fits P(e)(tau) = sin^2(pi (tau - t0) / (2 T)) so excited anchors sit on
/// maxima and ground anchors on minima. Anchors, merged and sorted, must
/// alternate between the two lists; each is assigned consecutive half-period
/// indices and (t0, T) come from linear least squares on tau = t0 + n T.
RabiCalibration calibrate_rabi(std::span<const double> excited_anchors, std::span<const double> ground_anchors);

// ---------------------------------------------------------------------------
// Experiments

enum class RamseyPrep { PiPulse, TwoPiPulse };

/// Prep pulse, readout on (latch), pi/2 - wait gap - pi/2, readout off, second
/// readout. axis1 of `gap_sweep` is the gap; the result has a single tau1 row
/// holding the prep pulse length.
GridResult ramsey_during_readout(RamseyPrep prep, const SweepSpec &gap_sweep, const DeviceParams &device,
                                 const HarnessOptions &options = {});

/// Single-shot schedule of the initialization experiment for one grid cell.
PulseSchedule initialization_schedule(double tau1, double tau2, const DeviceParams &device,
                                      const RabiCalibration &cal);

/// (tau1, tau2) map of the initialization experiment: prep of width tau1,
/// readout on, pi/2 - selective wait tau2 - pi/2, readout off, second readout.
GridResult initialization_map(const SweepSpec &sweep, const DeviceParams &device, const RabiCalibration &cal,
                              const DecoherenceParams &noise = {}, const HarnessOptions &options = {});

/// Dominant oscillation frequency (Hz) of uniformly sampled data: Hann-windowed,
/// zero-padded FFT peak with parabolic refinement, then polished by a
/// least-squares sinusoid fit within one bin. Returns 0 for a flat trace.
double fringe_frequency(std::span<const double> samples, double sample_spacing);

// ---------------------------------------------------------------------------
// Feedback latency

enum class LatencyMode { OnChip, OffChip };

struct LatencyModel {
    LatencyMode mode = LatencyMode::OnChip;
    double cable_length = 20.0;
    double cable_delay_rate = 5e-9;
    double processing_delay = 0;
    double tau_jba = 7e-9;
    double tau_pi = 5.5e-9;

    void validate() const;
};

struct LatencyComponent {
    std::string name;
    double seconds = 0;
};

struct LatencyReport {
    std::vector<LatencyComponent> components;
    double total = 0;

    double component(std::string_view name) const;
    std::string to_table() const;
    /// `component,delay_ns` rows, including a final `total` row.
    std::string to_csv() const;
};

LatencyReport latency_budget(const LatencyModel &m);

}  // namespace qfb

#endif
