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

#include "qfb/jba.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qfb {

const char *to_string(Outcome o) {
    return o == Outcome::High ? "high" : "low";
}

ShiftCurve::ShiftCurve(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    if (points_.empty()) {
        throw ConfigError("shift curve needs at least one point");
    }
    for (size_t k = 0; k < points_.size(); k++) {
        if (!std::isfinite(points_[k].first) || !std::isfinite(points_[k].second)) {
            throw ConfigError("shift curve entries must be finite");
        }
        if (k > 0 && points_[k].first <= points_[k - 1].first) {
            throw ConfigError("shift curve heights must be strictly increasing");
        }
        if (k > 0 && points_[k].second < points_[k - 1].second) {
            throw ConfigError("shift curve must be nondecreasing in height");
        }
    }
}

ShiftCurve ShiftCurve::parse(std::istream &in) {
    std::vector<std::pair<double, double>> points;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream row(line);
        double height;
        double shift_mhz;
        std::string extra;
        if (!(row >> height) || !(row >> shift_mhz) || (row >> extra)) {
            throw ConfigError("shift curve line " + std::to_string(line_no) + ": expected `height shift_MHz`");
        }
        points.emplace_back(height, kTwoPi * shift_mhz * 1e6);
    }
    return ShiftCurve(std::move(points));
}

ShiftCurve ShiftCurve::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open shift curve file " + path);
    }
    return parse(in);
}

double ShiftCurve::at(double height) const {
    if (!(height >= min_height() && height <= max_height())) {
        throw ConfigError("readout height " + std::to_string(height) + " outside shift table range [" +
                          std::to_string(min_height()) + ", " + std::to_string(max_height()) + "]");
    }
    auto hi = std::lower_bound(points_.begin(), points_.end(), height,
                               [](const auto &pt, double h) { return pt.first < h; });
    if (hi->first == height) {
        return hi->second;
    }
    auto lo = hi - 1;
    double w = (height - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

void JbaParams::validate() const {
    if (!(f_jba > 0) || !(q_factor > 0)) {
        throw std::invalid_argument("JbaParams: f_jba and q_factor must be positive");
    }
    auto prob = [](double p) { return p >= 0 && p <= 1; };
    if (!prob(projection_error) || !prob(assignment_error)) {
        throw std::invalid_argument("JbaParams: error probabilities must lie in [0, 1]");
    }
    if (!std::isfinite(delta_high) || !std::isfinite(delta_low)) {
        throw std::invalid_argument("JbaParams: Stark shifts must be finite");
    }
}

namespace {

MeasurementRecord project_with(double p_excited, const JbaParams &p, RandomSource &rng) {
    double u_born = rng.uniform();
    double u_proj = rng.uniform();
    double u_assign = rng.uniform();

    bool excited = u_born < p_excited;
    Outcome latched = excited ? Outcome::High : Outcome::Low;
    if (u_proj < p.projection_error) {
        excited = !excited;
    }
    if (u_assign < p.assignment_error) {
        latched = latched == Outcome::High ? Outcome::Low : Outcome::High;
    }
    return MeasurementRecord{
        .outcome = latched,
        .latch_time = p.tau_jba(),
        .stark_shift = stark_shift_during_readout(latched, p),
        .post_state = excited ? PureState::excited() : PureState::ground(),
    };
}

}  // namespace

MeasurementRecord project(const PureState &s, const JbaParams &p, RandomSource &rng) {
    return project_with(s.prob_excited(), p, rng);
}

MeasurementRecord project(const DensityMatrix &rho, const JbaParams &p, RandomSource &rng) {
    return project_with(rho.prob_excited(), p, rng);
}

double stark_shift_during_readout(Outcome outcome, const JbaParams &p) {
    return outcome == Outcome::High ? p.delta_high : p.delta_low;
}

double shift_from_height(double height, const JbaParams &p) {
    if (!p.shift_curve) {
        throw ConfigError("no readout-height shift table configured");
    }
    return p.shift_curve->at(height);
}

}  // namespace qfb
