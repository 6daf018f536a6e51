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

#include "qfb/harness.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "qfb/noise.h"

using namespace qfb;

namespace {

constexpr double kPi = std::numbers::pi;

DeviceParams device_with_shift(double delta_omega) {
    DeviceParams d;
    d.jba.delta_high = d.jba.delta_low + delta_omega;
    return d;
}

double peak_to_peak(const std::vector<double> &v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

double trace_distance(const Mat2 &a, const Mat2 &b) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

size_t index_of(const std::vector<double> &axis, double v) {
    for (size_t k = 0; k < axis.size(); k++) {
        if (std::abs(axis[k] - v) < 1e-15) return k;
    }
    ADD_FAILURE() << "value not on axis: " << v;
    return 0;
}

}  // namespace

TEST(decoherence, no_noise_is_identity) {
    DensityMatrix rho = DensityMatrix::from_pure(PureState::from_angles(1.0, 0.3));
    EXPECT_EQ(apply_decoherence(rho, 1e-6, {}).matrix(), rho.matrix());
}

TEST(decoherence, relaxes_to_ground) {
    DensityMatrix rho = DensityMatrix::from_pure(PureState::excited());
    DensityMatrix out = apply_decoherence(rho, 100e-6, {.t1 = 5e-6, .t2 = std::nullopt});
    EXPECT_LT(trace_distance(out.matrix(), DensityMatrix::from_pure(PureState::ground()).matrix()), 1e-6);
}

TEST(decoherence, coherence_decays_at_t2) {
    DensityMatrix plus = DensityMatrix::from_pure(PureState::normalized(1, 1));
    DensityMatrix out = apply_decoherence(plus, 1e-6, {.t1 = 5e-6, .t2 = 1e-6});
    EXPECT_NEAR(std::abs(out.matrix()(0, 1)), std::exp(-1.0) / 2, 1e-9);
    // Population relaxes at T1 only.
    EXPECT_NEAR(out.prob_excited(), 0.5 * std::exp(-0.2), 1e-12);
}

TEST(decoherence, kraus_sum_is_identity) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.1, 10);
    for (int k = 0; k < 1000; k++) {
        double t1 = u(rng) * 1e-6;
        double t2 = std::min(2 * t1, u(rng) * 1e-6);
        auto ks = kraus_operators(u(rng) * 1e-6, {.t1 = t1, .t2 = t2});
        Mat2 sum = Mat2::Zero();
        for (const auto &m : ks) sum += m.adjoint() * m;
        ASSERT_LT((sum - Mat2::Identity()).norm(), 1e-12);
    }
}

TEST(decoherence, validates_parameters) {
    EXPECT_THROW(DecoherenceParams({.t1 = 1e-6, .t2 = 3e-6}).validate(), std::invalid_argument);
    EXPECT_THROW(DecoherenceParams({.t1 = -1e-6, .t2 = std::nullopt}).validate(), std::invalid_argument);
    EXPECT_THROW(apply_decoherence(DensityMatrix::maximally_mixed(), -1, {.t1 = 1e-6, .t2 = std::nullopt}),
                 std::invalid_argument);
}

TEST(calibration, measured_anchors) {
    std::vector<double> excited{1.7e-9, 3.5e-9, 5.3e-9}, ground{2.6e-9, 4.4e-9};
    RabiCalibration c = calibrate_rabi(excited, ground);
    EXPECT_NEAR(c.pi_duration, 0.9e-9, 1e-18);
    EXPECT_NEAR(c.time_offset, 0.8e-9, 1e-18);
    for (double t : excited) EXPECT_NEAR(c.p_excited(t), 1.0, 1e-12);
    for (double t : ground) EXPECT_NEAR(c.p_excited(t), 0.0, 1e-12);
}

TEST(calibration, symmetric_case) {
    std::vector<double> excited{1e-9, 3e-9}, ground{2e-9};
    RabiCalibration c = calibrate_rabi(excited, ground);
    EXPECT_NEAR(c.pi_duration, 1e-9, 1e-18);
    EXPECT_NEAR(c.time_offset, 0.0, 1e-18);
}

TEST(calibration, robust_to_perturbed_anchors) {
    std::mt19937_64 rng(32);
    std::uniform_int_distribution<int> sign(0, 1);
    for (int k = 0; k < 50; k++) {
        auto jitter = [&](double t) { return t + (sign(rng) ? 0.05e-9 : -0.05e-9); };
        std::vector<double> excited{jitter(1.7e-9), jitter(3.5e-9), jitter(5.3e-9)};
        std::vector<double> ground{jitter(2.6e-9), jitter(4.4e-9)};
        RabiCalibration c = calibrate_rabi(excited, ground);
        EXPECT_NEAR(c.pi_duration, 0.9e-9, 0.1e-9);
    }
}

TEST(calibration, rejects_bad_anchors) {
    std::vector<double> one{1e-9}, none{};
    EXPECT_THROW(calibrate_rabi(one, none), std::invalid_argument);
    std::vector<double> excited{1e-9, 2e-9}, ground{3e-9};
    EXPECT_THROW(calibrate_rabi(excited, ground), std::invalid_argument);
}

TEST(calibration, angle_clamps_below_offset) {
    RabiCalibration c;
    EXPECT_EQ(c.angle(0.5e-9), 0.0);
    EXPECT_NEAR(c.angle(1.7e-9), kPi, 1e-12);
    EXPECT_NEAR(c.angle(2.6e-9), 2 * kPi, 1e-12);
}

TEST(fringe, synthetic_traces) {
    std::vector<double> trace;
    for (int k = 0; k <= 200; k++) {
        double t = k * 0.1e-9;
        double s = std::sin(kTwoPi * 137e6 * t / 2 + 0.3);
        trace.push_back(s * s);
    }
    EXPECT_NEAR(fringe_frequency(trace, 0.1e-9), 137e6, 137e6 * 1e-4);
    std::vector<double> flat(201, 1.0);
    EXPECT_EQ(fringe_frequency(flat, 0.1e-9), 0.0);
    EXPECT_THROW(fringe_frequency(std::vector<double>{1, 2}, 1e-9), std::invalid_argument);
}

TEST(ramsey, fringe_at_configured_shift) {
    SweepSpec sweep{.axis1 = {"gap", 0, 20e-9, 0.1e-9}, .axis2 = std::nullopt, .shots_per_point = 2000, .seed = 1};
    DeviceParams d = device_with_shift(kTwoPi * 150e6);
    GridResult high = ramsey_during_readout(RamseyPrep::PiPulse, sweep, d);
    GridResult low = ramsey_during_readout(RamseyPrep::TwoPiPulse, sweep, d);
    EXPECT_NEAR(high.tau1[0], 0.9e-9, 1e-15);
    EXPECT_NEAR(low.tau1[0], 1.8e-9, 1e-15);

    double f = fringe_frequency(high.p_excited, 0.1e-9);
    EXPECT_NEAR(f, 150e6, 1.5e6);
    EXPECT_NEAR(1 / f, 6.67e-9, 0.07e-9);
    EXPECT_LT(peak_to_peak(low.p_excited), 0.01);

    // Zero gap: the two pi/2 pulses make a pi flip, so |g> -> 1 and |e> -> 0.
    EXPECT_EQ(low.p_excited[0], 1.0);
    EXPECT_EQ(high.p_excited[0], 0.0);
}

TEST(ramsey, fringe_difference_tracks_configuration) {
    SweepSpec sweep{.axis1 = {"gap", 0, 20e-9, 0.1e-9}, .axis2 = std::nullopt, .shots_per_point = 2000, .seed = 2};
    DeviceParams d = device_with_shift(kTwoPi * 100e6);
    double f_high = fringe_frequency(ramsey_during_readout(RamseyPrep::PiPulse, sweep, d).p_excited, 0.1e-9);
    double f_low = fringe_frequency(ramsey_during_readout(RamseyPrep::TwoPiPulse, sweep, d).p_excited, 0.1e-9);
    EXPECT_NEAR(f_high - f_low, 100e6, 1e6);

    // A nonzero Low shift shows up as a Low-branch fringe.
    d.jba.delta_low = kTwoPi * 40e6;
    d.jba.delta_high = kTwoPi * 140e6;
    f_high = fringe_frequency(ramsey_during_readout(RamseyPrep::PiPulse, sweep, d).p_excited, 0.1e-9);
    f_low = fringe_frequency(ramsey_during_readout(RamseyPrep::TwoPiPulse, sweep, d).p_excited, 0.1e-9);
    EXPECT_NEAR(f_low, 0.0, 1e6);
    EXPECT_NEAR(f_high, 100e6, 1e6);
}

TEST(init_map, noiseless_properties) {
    DeviceParams d = device_with_shift(kPi / 5.5e-9);
    SweepSpec sweep{.axis1 = {"tau1", 0, 6e-9, 0.1e-9},
                    .axis2 = SweepAxis{"tau2", 0, 20e-9, 0.25e-9},
                    .shots_per_point = 400,
                    .seed = 3};
    GridResult g = initialization_map(sweep, d, RabiCalibration{});

    for (double tau2 : {5.5e-9, 16.5e-9}) {
        auto col = g.column(index_of(g.tau2, tau2));
        EXPECT_GT(*std::min_element(col.begin(), col.end()), 0.99) << tau2;
    }
    for (double tau1 : {2.6e-9, 4.4e-9}) {
        auto row = g.row(index_of(g.tau1, tau1));
        EXPECT_GT(*std::min_element(row.begin(), row.end()), 0.99) << tau1;
    }
    auto excited_row = g.row(index_of(g.tau1, 1.7e-9));
    for (size_t j = 0; j < g.tau2.size(); j++) {
        double s = std::sin(kPi / 5.5e-9 * g.tau2[j] / 2);
        double p = s * s;
        EXPECT_NEAR(excited_row[j], p, 4 * std::sqrt(p * (1 - p) / 400) + 1e-12) << g.tau2[j];
    }
    // The 11 ns column is not a convergence column in this model.
    auto col11 = g.column(index_of(g.tau2, 11e-9));
    EXPECT_LT(*std::min_element(col11.begin(), col11.end()), 0.5);
}

TEST(init_map, same_seed_same_csv_for_any_worker_count) {
    DeviceParams d = device_with_shift(kPi / 5.5e-9);
    d.jba.projection_error = 0.03;
    SweepSpec sweep{.axis1 = {"tau1", 0, 3e-9, 0.3e-9},
                    .axis2 = SweepAxis{"tau2", 0, 10e-9, 0.5e-9},
                    .shots_per_point = 100,
                    .seed = 99};
    std::string one = initialization_map(sweep, d, {}, {}, {.workers = 1}).to_csv();
    std::string eight = initialization_map(sweep, d, {}, {}, {.workers = 8}).to_csv();
    EXPECT_EQ(one, eight);
    sweep.seed = 100;
    EXPECT_NE(initialization_map(sweep, d, {}, {}, {.workers = 8}).to_csv(), one);
}

TEST(init_map, csv_format) {
    DeviceParams d = device_with_shift(kPi / 5.5e-9);
    SweepSpec sweep{.axis1 = {"tau1", 1.7e-9, 1.7e-9, 1e-9},
                    .axis2 = SweepAxis{"tau2", 0, 5.5e-9, 5.5e-9},
                    .shots_per_point = 10,
                    .seed = 0};
    EXPECT_EQ(initialization_map(sweep, d, {}).to_csv(),
              "tau1_ns,tau2_ns,p_excited,shots\n1.7,0,0,10\n1.7,5.5,1,10\n");
}

TEST(init_map, standard_error_scales_with_shots) {
    // Single cell with P(e) = 1/2: excited prep, quarter-period wait.
    DeviceParams d = device_with_shift(kPi / 5.5e-9);
    auto spread = [&](uint64_t shots, int seeds) {
        double sum = 0, sum2 = 0;
        for (int s = 0; s < seeds; s++) {
            SweepSpec sweep{.axis1 = {"tau1", 1.7e-9, 1.7e-9, 1e-9},
                            .axis2 = SweepAxis{"tau2", 2.75e-9, 2.75e-9, 1e-9},
                            .shots_per_point = shots,
                            .seed = static_cast<uint64_t>(s)};
            double p = initialization_map(sweep, d, {}).p_excited[0];
            sum += p;
            sum2 += p * p;
        }
        double mean = sum / seeds;
        return std::sqrt(sum2 / seeds - mean * mean);
    };
    double se_small = spread(100, 200);
    double se_large = spread(10000, 60);
    EXPECT_NEAR(se_small, 0.05, 0.05 * 0.3);
    EXPECT_NEAR(se_large, 0.005, 0.005 * 0.4);
    EXPECT_NEAR(se_small / se_large, 10, 4);
}

TEST(init_map, decoherence_lowers_convergence) {
    DeviceParams d = device_with_shift(kPi / 5.5e-9);
    SweepSpec sweep{.axis1 = {"tau1", 0, 2e-9, 1e-9},
                    .axis2 = SweepAxis{"tau2", 5.5e-9, 5.5e-9, 1e-9},
                    .shots_per_point = 2000,
                    .seed = 4};
    GridResult clean = initialization_map(sweep, d, {});
    GridResult noisy = initialization_map(sweep, d, {}, {.t1 = 30e-9, .t2 = 30e-9});
    for (size_t i = 0; i < clean.tau1.size(); i++) {
        EXPECT_EQ(clean.at(i, 0), 1.0);
        EXPECT_LT(noisy.at(i, 0), 0.95);
    }
}

TEST(sweep, validation_and_values) {
    SweepAxis a{"x", 0, 1e-9, 0.25e-9};
    EXPECT_EQ(a.values().size(), 5u);
    EXPECT_THROW((SweepAxis{"x", 0, 1, 0}).validate(), std::invalid_argument);
    EXPECT_THROW((SweepAxis{"x", 2, 1, 1}).validate(), std::invalid_argument);
    SweepSpec s{.axis1 = a, .axis2 = std::nullopt, .shots_per_point = 0, .seed = 0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.shots_per_point = 1;
    EXPECT_THROW(initialization_map(s, DeviceParams{}, {}), std::invalid_argument);
}

TEST(latency, on_chip_defaults) {
    LatencyReport r = latency_budget({});
    EXPECT_NEAR(r.total, 12.5e-9, 1e-18);
    EXPECT_GE(r.total, 10e-9);
    EXPECT_LE(r.total, 20e-9);
    EXPECT_THROW(r.component("cable"), std::out_of_range);
    EXPECT_EQ(r.to_csv(), "component,delay_ns\njba_latch,7\nselective_rotation,5.5\ntotal,12.5\n");
}

TEST(latency, off_chip) {
    LatencyReport r = latency_budget({.mode = LatencyMode::OffChip});
    EXPECT_NEAR(r.component("cable"), 100e-9, 1e-18);
    EXPECT_NEAR(r.total, 112.5e-9, 1e-18);

    LatencyReport slow = latency_budget({.mode = LatencyMode::OffChip, .processing_delay = 2e-6});
    EXPECT_GT(slow.total, 2e-6);
    EXPECT_GT(slow.component("processing") / slow.total, 0.9);
    EXPECT_THROW(latency_budget({.cable_length = -1}), std::invalid_argument);
}
