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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qfb/dynamics.h"
#include "qfb/harness.h"
#include "qfb/protocol.h"
#include "qfb/seqlang.h"

using namespace qfb;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0, 1};

struct Verdict {
    bool pass = false;
    std::string detail;
};

PureState haar_state(std::mt19937_64 &rng) {
    std::normal_distribution<double> n;
    return PureState::normalized({n(rng), n(rng)}, {n(rng), n(rng)});
}

// Hand-written final states of the arbitrary-preparation sequence.
PureState oracle_final(bool excited_branch, double t1, double t2, double phi) {
    if (!excited_branch) {
        return PureState(std::cos(t1 / 2), kI * std::sin(t1 / 2));
    }
    return PureState(std::cos(t2 / 2), kI * std::exp(kI * phi) * std::sin(t2 / 2));
}

Verdict analytic_oracle() {
    DeviceParams device;
    std::mt19937_64 angles(101);
    std::uniform_real_distribution<double> theta(0, 2 * kPi);
    RandomSource rng(1, 0);
    double worst = 1;
    for (int k = 0; k < 200; k++) {
        FeedbackSpec spec{.theta1 = theta(angles), .theta2 = theta(angles), .phi = theta(angles)};
        PulseSchedule s = build_arbitrary_prep(spec, device);
        auto low = simulate_schedule(s, PureState::ground(), rng);
        auto high = simulate_schedule(s, PureState::excited(), rng);
        if (low.feedback().outcome != Outcome::Low || high.feedback().outcome != Outcome::High) {
            return {false, "wrong branch taken"};
        }
        worst = std::min(worst, fidelity(low.final_state, oracle_final(false, spec.theta1, spec.theta2, spec.phi)));
        worst = std::min(worst, fidelity(high.final_state, oracle_final(true, spec.theta1, spec.theta2, spec.phi)));
    }
    return {worst > 1 - 1e-9, fmt::format("200 specs x 2 branches, min fidelity 1 - {:.2e}", 1 - worst)};
}

Verdict initialization() {
    DeviceParams device;
    PulseSchedule s = build_initialization(device);
    std::mt19937_64 states(202);
    RandomSource rng(2, 0);
    double worst = 1;
    for (int k = 0; k < 100; k++) {
        worst = std::min(worst, fidelity(simulate_schedule(s, haar_state(states), rng).final_state,
                                         PureState::excited()));
    }
    DeviceParams noisy = device;
    noisy.jba.projection_error = 0.02;
    PulseSchedule sn = build_initialization(noisy);
    double sum = 0;
    const int shots = 10000;
    for (int k = 0; k < shots; k++) {
        sum += simulate_schedule(sn, haar_state(states), rng).final_state.prob_excited();
    }
    double mean = sum / shots;
    return {worst > 1 - 1e-9 && mean >= 0.96,
            fmt::format("100 Haar states min fidelity 1 - {:.2e}; projection_error 0.02 mean P(e) {:.4f}",
                        1 - worst, mean)};
}

Verdict ramsey_fringe() {
    DeviceParams d;
    d.jba.delta_low = 0;
    d.jba.delta_high = kTwoPi * 150e6;
    SweepSpec sweep{.axis1 = {"gap", 0, 20e-9, 0.1e-9}, .axis2 = std::nullopt, .shots_per_point = 10000, .seed = 3};
    GridResult high = ramsey_during_readout(RamseyPrep::PiPulse, sweep, d);
    GridResult low = ramsey_during_readout(RamseyPrep::TwoPiPulse, sweep, d);
    double f = fringe_frequency(high.p_excited, 0.1e-9);
    auto [lo, hi] = std::minmax_element(low.p_excited.begin(), low.p_excited.end());
    double p2p = *hi - *lo;
    bool pass = std::abs(f - 150e6) <= 1.5e6 && p2p < 0.01;
    return {pass, fmt::format("High fringe {:.3f} MHz (target 150 +- 1.5), Low peak-to-peak {:.4f}", f / 1e6, p2p)};
}

Verdict initialization_map_columns() {
    DeviceParams d;
    d.jba.delta_high = d.jba.delta_low + kTwoPi * 90.9e6;
    std::vector<double> excited{1.7e-9, 3.5e-9, 5.3e-9}, ground{2.6e-9, 4.4e-9};
    RabiCalibration cal = calibrate_rabi(excited, ground);
    SweepSpec sweep{.axis1 = {"tau1", 0, 6e-9, 0.1e-9},
                    .axis2 = SweepAxis{"tau2", 0, 20e-9, 0.25e-9},
                    .shots_per_point = 1000,
                    .seed = 4};
    GridResult g = initialization_map(sweep, d, cal);

    std::vector<double> col_min;
    for (size_t j = 0; j < g.tau2.size(); j++) {
        auto c = g.column(j);
        col_min.push_back(*std::min_element(c.begin(), c.end()));
    }
    auto column_at = [&](double tau2) {
        size_t best = 0;
        for (size_t j = 0; j < g.tau2.size(); j++) {
            if (std::abs(g.tau2[j] - tau2) < std::abs(g.tau2[best] - tau2)) best = j;
        }
        return best;
    };
    // Convergence columns: local maxima of min-over-tau1 P(e) above 0.99.
    std::vector<double> peaks;
    for (size_t j = 0; j < col_min.size(); j++) {
        bool left = j == 0 || col_min[j] >= col_min[j - 1];
        bool right = j + 1 == col_min.size() || col_min[j] >= col_min[j + 1];
        if (col_min[j] > 0.99 && left && right) peaks.push_back(g.tau2[j]);
    }
    double at_5_5 = col_min[column_at(5.5e-9)];
    double at_11 = col_min[column_at(11e-9)];
    bool next_is_16_5 = peaks.size() >= 2 && std::abs(peaks[0] - 5.5e-9) < 0.13e-9 &&
                        std::abs(peaks[1] - 16.5e-9) < 0.13e-9;
    std::string list;
    for (double p : peaks) list += fmt::format(" {:.2f}", p * 1e9);
    return {cal.pi_duration > 0 && at_5_5 > 0.99 && next_is_16_5,
            fmt::format("calibration pi={:.3f} ns t0={:.3f} ns; min P(e) at 5.5 ns {:.4f}; convergence columns [ns]:{}; "
                        "11 ns column min P(e) {:.4f} (not a convergence column in this model)",
                        cal.pi_duration * 1e9, cal.time_offset * 1e9, at_5_5, list, at_11)};
}

Verdict latency() {
    LatencyReport on = latency_budget({.mode = LatencyMode::OnChip});
    LatencyReport off = latency_budget({.mode = LatencyMode::OffChip, .cable_length = 20, .cable_delay_rate = 5e-9});
    LatencyReport slow = latency_budget(
        {.mode = LatencyMode::OffChip, .cable_length = 20, .cable_delay_rate = 5e-9, .processing_delay = 2e-6});
    double cable = off.component("cable");
    double ratio = slow.total / on.total;
    bool pass = std::abs(on.total - 12.5e-9) < 1e-18 && on.total >= 10e-9 && on.total <= 20e-9 &&
                std::abs(cable - 100e-9) < 1e-21 && ratio > 150;
    return {pass, fmt::format("on-chip {:.4g} ns, 20 m cable {:.6g} ns, off-chip/on-chip with 2 us processing {:.1f}",
                              on.total * 1e9, cable * 1e9, ratio)};
}

Verdict rwa_validity() {
    std::vector<double> excited{1.7e-9, 3.5e-9, 5.3e-9}, ground{2.6e-9, 4.4e-9};
    double rabi = kPi / calibrate_rabi(excited, ground).pi_duration;
    const double omega_q = kTwoPi * 3.4e9;
    std::vector<double> errs;
    for (double scale : {1.0, 0.1, 0.01}) {
        double w = rabi * scale;
        DriveParams p{.omega_qubit = omega_q, .omega_drive = omega_q, .rabi_omega = w, .start = 0,
                      .duration = kPi / w};
        errs.push_back(rwa_error(p, IntegratorConfig(1e-12)));
    }
    bool pass = errs[0] < 2e-2 && errs[1] < errs[0] && errs[2] < errs[1];
    return {pass, fmt::format("Omega/2pi = {:.3f} GHz: rwa_error {:.3e}; x0.1 {:.3e}; x0.01 {:.3e}",
                              rabi / kTwoPi / 1e9, errs[0], errs[1], errs[2])};
}

seq::SequenceDoc random_doc(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0, 1);
    auto round_to = [](double v, double step) { return std::round(v / step) * step; };
    seq::SequenceDoc doc;
    if (u(rng) < 0.5) {
        doc.settings.push_back(
            {"delta_omega", seq::Quantity{round_to(50 + 200 * u(rng), 0.001) * 1e6, seq::Dimension::Frequency}, {}});
    }
    int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int k = 0; k < n; k++) {
        seq::Statement st;
        switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
            case 0:
                st.kind = seq::StmtKind::Pulse;
                st.angle = round_to(-360 + 720 * u(rng), 0.01) * kPi / 180;
                if (u(rng) < 0.3) st.at = round_to(100 * u(rng), 0.001) * 1e-9;
                break;
            case 1:
                st.kind = seq::StmtKind::Wait;
                st.duration = round_to(50 * u(rng), 0.0001) * 1e-9;
                st.selective = u(rng) < 0.5;
                break;
            case 2:
                st.kind = seq::StmtKind::ReadoutOn;
                break;
            case 3:
                st.kind = seq::StmtKind::ReadoutOff;
                break;
            default:
                st.kind = seq::StmtKind::Measure;
        }
        doc.statements.push_back(st);
    }
    return doc;
}

Verdict property_suites() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> angle(-4 * kPi, 4 * kPi);
    int failures = 0;

    // Unitarity, norm, trace: 1000 random cases each.
    for (int k = 0; k < 1000; k++) {
        Unitary2 u = rot_x(angle(rng)) * phase_z(std::abs(angle(rng)) * 1e-9, angle(rng) * 1e9);
        failures += (u.matrix().adjoint() * u.matrix() - Mat2::Identity()).norm() > 1e-10;
    }
    for (int k = 0; k < 1000; k++) {
        PureState s = apply(rot_x(angle(rng)) * phase_z(1e-9, angle(rng) * 1e9), haar_state(rng));
        failures += std::abs(s.vector().squaredNorm() - 1) > 1e-12;
    }
    for (int k = 0; k < 1000; k++) {
        DensityMatrix rho = apply_decoherence(apply(rot_x(angle(rng)), DensityMatrix::from_pure(haar_state(rng))),
                                              std::abs(angle(rng)) * 1e-7, {.t1 = 5e-6, .t2 = 3e-6});
        failures += std::abs(rho.matrix().trace().real() - 1) > 1e-12;
    }
    int invariant_failures = failures;

    // QND repeatability.
    JbaParams jba;
    RandomSource src(5, 0);
    int qnd_failures = 0;
    for (int k = 0; k < 10000; k++) {
        MeasurementRecord a = project(haar_state(rng), jba, src);
        MeasurementRecord b = project(a.post_state, jba, src);
        qnd_failures += a.outcome != b.outcome;
    }

    // DSL round trip.
    int dsl_failures = 0;
    for (int k = 0; k < 200; k++) {
        seq::SequenceDoc doc = random_doc(rng);
        std::string text = seq::serialize(doc);
        dsl_failures += !seq::equivalent(doc, seq::parse(text)) || seq::serialize(seq::parse(text)) != text;
    }

    // Seed determinism across worker counts.
    DeviceParams d;
    d.jba.delta_high = kPi / 5.5e-9;
    d.jba.projection_error = 0.05;
    SweepSpec sweep{.axis1 = {"tau1", 0, 6e-9, 0.5e-9},
                    .axis2 = SweepAxis{"tau2", 0, 20e-9, 1e-9},
                    .shots_per_point = 200,
                    .seed = 77};
    bool identical = initialization_map(sweep, d, {}, {}, {.workers = 1}).to_csv() ==
                     initialization_map(sweep, d, {}, {}, {.workers = 8}).to_csv();

    bool pass = invariant_failures == 0 && qnd_failures == 0 && dsl_failures == 0 && identical;
    return {pass, fmt::format("invariant violations {}/3000, QND mismatches {}/10000, DSL round-trip failures {}/200, "
                              "1 vs 8 workers CSV {}",
                              invariant_failures, qnd_failures, dsl_failures, identical ? "identical" : "DIFFERENT")};
}

struct Criterion {
    int id;
    const char *name;
    double budget_s;
    std::function<Verdict()> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "analytic-oracle equivalence", 5, analytic_oracle},
        {2, "initialization", 60, initialization},
        {3, "Ramsey fringe during readout", 60, ramsey_fringe},
        {4, "initialization map (partial)", 60, initialization_map_columns},
        {5, "feedback latency", 1, latency},
        {6, "RWA validity", 30, rwa_validity},
        {7, "property suites", 60, property_suites},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception &e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            v.pass = false;
            v.detail += fmt::format("; over the {:.0f} s budget", c.budget_s);
        }
        failed += !v.pass;
        fmt::print("{} criterion {}: {}: {} ({:.2f} s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail, secs);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
