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

#ifndef QFB_JBA_H
#define QFB_JBA_H

#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfb/errors.h"
#include "qfb/qubit.h"
#include "qfb/random.h"

namespace qfb {

inline constexpr double kTwoPi = 2 * std::numbers::pi;

/// Latched bistable state of the bifurcation amplifier.
enum class Outcome { Low, High };

const char *to_string(Outcome o);

/// Monotone table mapping readout pulse height to the qubit frequency shift it
/// induces (rad/s), interpolated piecewise-linearly.
class ShiftCurve {
   public:
    /// Points must be sorted by strictly increasing height with nondecreasing
    /// shift; otherwise ConfigError.
    explicit ShiftCurve(std::vector<std::pair<double, double>> points);

    /// Two-column text table: `height shift_MHz` per line (whitespace or comma
    /// separated), '#' starts a comment. Shift is a cyclic frequency in MHz.
    static ShiftCurve parse(std::istream &in);
    static ShiftCurve load(const std::string &path);

    const std::vector<std::pair<double, double>> &points() const { return points_; }
    double min_height() const { return points_.front().first; }
    double max_height() const { return points_.back().first; }

    /// ConfigError outside [min_height, max_height].
    double at(double height) const;

   private:
    std::vector<std::pair<double, double>> points_;
};

struct JbaParams {
    double f_jba = 6.5e9;
    double q_factor = 45.5;
    /// Frequency shift while latched High / Low, rad/s.
    double delta_high = kTwoPi * 150e6;
    double delta_low = 0;
    double projection_error = 0;
    double assignment_error = 0;
    std::optional<ShiftCurve> shift_curve;

    /// Bifurcation (latch) time q_factor / f_jba.
    double tau_jba() const { return q_factor / f_jba; }
    /// delta_high - delta_low.
    double delta_omega() const { return delta_high - delta_low; }

    void validate() const;
};

struct MeasurementRecord {
    Outcome outcome = Outcome::Low;
    double latch_time = 0;
    double stark_shift = 0;
    PureState post_state = PureState::ground();
};

/// QND projection through the bifurcation amplifier. Draws the Born outcome,
/// then flips the post-measurement state with probability projection_error
/// and the latched outcome with probability assignment_error. The latched
/// outcome sets the Stark shift. Consumes exactly three uniforms from rng.
MeasurementRecord project(const PureState &s, const JbaParams &p, RandomSource &rng);

/// Density-matrix variant; the Born probability is rho_ee.
MeasurementRecord project(const DensityMatrix &rho, const JbaParams &p, RandomSource &rng);

/// Qubit frequency shift while the readout is latched in `outcome`.
double stark_shift_during_readout(Outcome outcome, const JbaParams &p);

/// Frequency shift for a given readout pulse height, from p.shift_curve.
double shift_from_height(double height, const JbaParams &p);

}  // namespace qfb

#endif
