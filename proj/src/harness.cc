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
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <mutex>
#include <numbers>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <fftw3.h>
#include <fmt/format.h>

namespace qfb {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

void SweepAxis::validate() const {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
        throw std::invalid_argument("sweep axis '" + name + "': values must be finite");
    }
    if (!(step > 0)) {
        throw std::invalid_argument("sweep axis '" + name + "': step must be positive");
    }
    if (start > stop) {
        throw std::invalid_argument("sweep axis '" + name + "': start must not exceed stop");
    }
}

std::vector<double> SweepAxis::values() const {
    validate();
    auto n = static_cast<size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (size_t k = 0; k < n; k++) {
        out[k] = start + static_cast<double>(k) * step;
    }
    return out;
}

void SweepSpec::validate() const {
    axis1.validate();
    if (axis2) {
        axis2->validate();
    }
    if (shots_per_point == 0) {
        throw std::invalid_argument("shots per point must be positive");
    }
}

std::vector<double> GridResult::row(size_t i) const {
    return {p_excited.begin() + static_cast<std::ptrdiff_t>(i * tau2.size()),
            p_excited.begin() + static_cast<std::ptrdiff_t>((i + 1) * tau2.size())};
}

std::vector<double> GridResult::column(size_t j) const {
    std::vector<double> out;
    for (size_t i = 0; i < tau1.size(); i++) {
        out.push_back(at(i, j));
    }
    return out;
}

void GridResult::write_csv(std::ostream &out) const {
    out << "tau1_ns,tau2_ns,p_excited,shots\n";
    for (size_t i = 0; i < tau1.size(); i++) {
        for (size_t j = 0; j < tau2.size(); j++) {
            out << fmt::format("{:.9g},{:.9g},{:.9g},{}\n", tau1[i] * 1e9, tau2[j] * 1e9, at(i, j), shots);
        }
    }
}

std::string GridResult::to_csv() const {
    std::ostringstream s;
    write_csv(s);
    return s.str();
}

std::vector<double> run_cells(size_t n, unsigned workers, const std::function<double(size_t)> &fn) {
    std::vector<double> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<size_t>(n, 1))));
    if (workers == 1) {
        for (size_t k = 0; k < n; k++) {
            out[k] = fn(k);
        }
        return out;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; w++) {
        pool.emplace_back([&] {
            try {
                for (size_t k = next++; k < n && !failed; k = next++) {
                    out[k] = fn(k);
                }
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

double RabiCalibration::angle(double tau) const {
    return kPi * std::max(0.0, tau - time_offset) / pi_duration;
}

double RabiCalibration::p_excited(double tau) const {
    double s = std::sin(kPi * (tau - time_offset) / (2 * pi_duration));
    return s * s;
}

RabiCalibration calibrate_rabi(std::span<const double> excited_anchors, std::span<const double> ground_anchors) {
    struct Anchor {
        double tau;
        bool excited;
    };
    std::vector<Anchor> anchors;
    for (double t : excited_anchors) {
        anchors.push_back({t, true});
    }
    for (double t : ground_anchors) {
        anchors.push_back({t, false});
    }
    if (anchors.size() < 2) {
        throw std::invalid_argument("calibrate_rabi: need at least two anchors");
    }
    for (const auto &a : anchors) {
        if (!std::isfinite(a.tau) || a.tau < 0) {
            throw std::invalid_argument("calibrate_rabi: anchors must be finite and non-negative");
        }
    }
    std::sort(anchors.begin(), anchors.end(), [](const Anchor &a, const Anchor &b) { return a.tau < b.tau; });
    for (size_t k = 1; k < anchors.size(); k++) {
        if (anchors[k].excited == anchors[k - 1].excited || anchors[k].tau == anchors[k - 1].tau) {
            throw std::invalid_argument("calibrate_rabi: anchors must alternate between excited and ground");
        }
    }

    // tau_k = t0 + (n0 + k) T. Excited anchors sit on odd half-periods, ground on even.
    const double m = static_cast<double>(anchors.size());
    double mean_k = (m - 1) / 2;
    double mean_tau = 0;
    for (const auto &a : anchors) {
        mean_tau += a.tau / m;
    }
    double sxx = 0;
    double sxy = 0;
    for (size_t k = 0; k < anchors.size(); k++) {
        double dk = static_cast<double>(k) - mean_k;
        sxx += dk * dk;
        sxy += dk * (anchors[k].tau - mean_tau);
    }
    double period = sxy / sxx;
    double offset_at_first = mean_tau - period * mean_k;
    if (!(period > 0)) {
        throw std::invalid_argument("calibrate_rabi: fit gives a non-positive pi duration");
    }
    // Smallest non-negative offset: the largest parity-compatible n0 with t0 >= 0.
    const double slack = 1e-9 * period;
    int n0 = anchors.front().excited ? 1 : 0;
    if (offset_at_first - n0 * period < -slack) {
        throw std::invalid_argument("calibrate_rabi: anchors imply a negative time offset");
    }
    while (offset_at_first - (n0 + 2) * period >= -slack) {
        n0 += 2;
    }
    double t0 = std::max(0.0, offset_at_first - n0 * period);
    return RabiCalibration{.pi_duration = period, .time_offset = t0};
}

namespace {

uint64_t count_high(const PulseSchedule &sched, uint64_t shots, RandomSource &rng, const DecoherenceParams &noise,
                    const SimOptions &sim) {
    uint64_t high = 0;
    if (noise.enabled()) {
        DensityMatrix init = DensityMatrix::from_pure(PureState::ground());
        for (uint64_t s = 0; s < shots; s++) {
            auto r = simulate_schedule(sched, init, rng, sim, noise);
            high += r.measured_outcome() == Outcome::High;
        }
    } else {
        PureState init = PureState::ground();
        for (uint64_t s = 0; s < shots; s++) {
            auto r = simulate_schedule(sched, init, rng, sim);
            high += r.measured_outcome() == Outcome::High;
        }
    }
    return high;
}

}  // namespace

GridResult ramsey_during_readout(RamseyPrep prep, const SweepSpec &gap_sweep, const DeviceParams &device,
                                 const HarnessOptions &options) {
    gap_sweep.validate();
    device.validate();
    double prep_angle = prep == RamseyPrep::PiPulse ? kPi : 2 * kPi;

    GridResult out;
    out.tau1 = {prep_angle / device.rabi_omega};
    out.tau2 = gap_sweep.axis1.values();
    out.shots = gap_sweep.shots_per_point;

    SimOptions sim{.mode = options.mode};
    out.p_excited = run_cells(out.tau2.size(), options.workers, [&](size_t cell) {
        ScheduleBuilder b(device);
        b.rotate(prep_angle)
            .readout_on()
            .rotate(kPi / 2)
            .wait(out.tau2[cell], true)
            .rotate(kPi / 2)
            .readout_off()
            .readout_on()
            .measure()
            .readout_off();
        PulseSchedule sched(b.take(), device);
        RandomSource rng(gap_sweep.seed, cell);
        uint64_t high = count_high(sched, gap_sweep.shots_per_point, rng, device.decoherence(), sim);
        return static_cast<double>(high) / static_cast<double>(gap_sweep.shots_per_point);
    });
    return out;
}

PulseSchedule initialization_schedule(double tau1, double tau2, const DeviceParams &device,
                                      const RabiCalibration &cal) {
    ScheduleBuilder b(device);
    b.rotate(cal.angle(tau1))
        .readout_on()
        .rotate(kPi / 2)
        .wait(tau2, true)
        .rotate(kPi / 2)
        .readout_off()
        .readout_on()
        .measure()
        .readout_off();
    return PulseSchedule(b.take(), device);
}

GridResult initialization_map(const SweepSpec &sweep, const DeviceParams &device, const RabiCalibration &cal,
                              const DecoherenceParams &noise, const HarnessOptions &options) {
    sweep.validate();
    device.validate();
    noise.validate();
    if (!sweep.axis2) {
        throw std::invalid_argument("initialization_map needs a tau2 axis");
    }
    if (!(cal.pi_duration > 0) || !(cal.time_offset >= 0)) {
        throw std::invalid_argument("initialization_map: invalid Rabi calibration");
    }

    GridResult out;
    out.tau1 = sweep.axis1.values();
    out.tau2 = sweep.axis2->values();
    out.shots = sweep.shots_per_point;
    const size_t cols = out.tau2.size();

    SimOptions sim{.mode = options.mode};
    out.p_excited = run_cells(out.tau1.size() * cols, options.workers, [&](size_t cell) {
        PulseSchedule sched = initialization_schedule(out.tau1[cell / cols], out.tau2[cell % cols], device, cal);
        RandomSource rng(sweep.seed, cell);
        uint64_t high = count_high(sched, sweep.shots_per_point, rng, noise, sim);
        return static_cast<double>(high) / static_cast<double>(sweep.shots_per_point);
    });
    return out;
}

namespace {

// Residual of the best fit c + a cos(w t) + b sin(w t) at fixed w.
double sinusoid_residual(std::span<const double> y, double dt, double freq) {
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(y.size()), 3);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(y.size()));
    for (size_t k = 0; k < y.size(); k++) {
        double ph = 2 * kPi * freq * dt * static_cast<double>(k);
        auto r = static_cast<Eigen::Index>(k);
        basis(r, 0) = 1;
        basis(r, 1) = std::cos(ph);
        basis(r, 2) = std::sin(ph);
        rhs(r) = y[k];
    }
    Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(rhs);
    return (basis * coef - rhs).squaredNorm();
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s *p) const { fftw_destroy_plan(p); }
};

}  // namespace

double fringe_frequency(std::span<const double> samples, double sample_spacing) {
    if (samples.size() < 4 || !(sample_spacing > 0)) {
        throw std::invalid_argument("fringe_frequency: need at least 4 samples and a positive spacing");
    }
    const size_t n = samples.size();
    double mean = 0;
    for (double v : samples) {
        mean += v / static_cast<double>(n);
    }
    double var = 0;
    for (double v : samples) {
        var += (v - mean) * (v - mean);
    }
    if (var / static_cast<double>(n) < 1e-12) {
        return 0.0;
    }

    size_t nfft = 1;
    while (nfft < std::max<size_t>(64 * n, 8192)) {
        nfft <<= 1;
    }
    std::vector<double> in(nfft, 0.0);
    for (size_t k = 0; k < n; k++) {
        double hann = 0.5 - 0.5 * std::cos(2 * kPi * static_cast<double>(k) / static_cast<double>(n - 1));
        in[k] = (samples[k] - mean) * hann;
    }
    std::vector<std::complex<double>> spec(nfft / 2 + 1);
    std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan;
    {
        // Planning is not thread-safe in FFTW.
        static std::mutex plan_mutex;
        std::lock_guard lock(plan_mutex);
        plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(),
                                        reinterpret_cast<fftw_complex *>(spec.data()), FFTW_ESTIMATE));
    }
    fftw_execute(plan.get());

    size_t peak = 1;
    for (size_t k = 2; k + 1 < spec.size(); k++) {
        if (std::abs(spec[k]) > std::abs(spec[peak])) {
            peak = k;
        }
    }
    double a = std::abs(spec[peak - 1]);
    double b = std::abs(spec[peak]);
    double c = std::abs(spec[peak + 1]);
    double denom = a - 2 * b + c;
    double delta = denom != 0 ? 0.5 * (a - c) / denom : 0.0;
    double bin = 1.0 / (static_cast<double>(nfft) * sample_spacing);
    double f_fft = (static_cast<double>(peak) + delta) * bin;

    // Golden-section polish over one natural-resolution bin around the FFT estimate.
    double span = 1.0 / (static_cast<double>(n) * sample_spacing);
    double lo = std::max(0.0, f_fft - span);
    double hi = f_fft + span;
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double r1 = sinusoid_residual(samples, sample_spacing, x1);
    double r2 = sinusoid_residual(samples, sample_spacing, x2);
    for (int it = 0; it < 80; it++) {
        if (r1 < r2) {
            hi = x2;
            x2 = x1;
            r2 = r1;
            x1 = hi - g * (hi - lo);
            r1 = sinusoid_residual(samples, sample_spacing, x1);
        } else {
            lo = x1;
            x1 = x2;
            r1 = r2;
            x2 = lo + g * (hi - lo);
            r2 = sinusoid_residual(samples, sample_spacing, x2);
        }
    }
    return (lo + hi) / 2;
}

void LatencyModel::validate() const {
    for (double v : {cable_length, cable_delay_rate, processing_delay, tau_jba, tau_pi}) {
        if (!(v >= 0) || !std::isfinite(v)) {
            throw std::invalid_argument("LatencyModel: all delays and lengths must be finite and non-negative");
        }
    }
}

double LatencyReport::component(std::string_view name) const {
    for (const auto &c : components) {
        if (c.name == name) {
            return c.seconds;
        }
    }
    throw std::out_of_range("no latency component '" + std::string(name) + "'");
}

std::string LatencyReport::to_table() const {
    std::string out = fmt::format("{:<20} {:>14}\n", "component", "delay [ns]");
    for (const auto &c : components) {
        out += fmt::format("{:<20} {:>14.6g}\n", c.name, c.seconds * 1e9);
    }
    out += fmt::format("{:<20} {:>14.6g}\n", "total", total * 1e9);
    return out;
}

std::string LatencyReport::to_csv() const {
    std::string out = "component,delay_ns\n";
    for (const auto &c : components) {
        out += fmt::format("{},{:.9g}\n", c.name, c.seconds * 1e9);
    }
    out += fmt::format("total,{:.9g}\n", total * 1e9);
    return out;
}

LatencyReport latency_budget(const LatencyModel &m) {
    m.validate();
    LatencyReport r;
    if (m.mode == LatencyMode::OffChip) {
        r.components.push_back({"cable", m.cable_length * m.cable_delay_rate});
        r.components.push_back({"processing", m.processing_delay});
    }
    r.components.push_back({"jba_latch", m.tau_jba});
    r.components.push_back({"selective_rotation", m.tau_pi});
    for (const auto &c : r.components) {
        r.total += c.seconds;
    }
    return r;
}

}  // namespace qfb
