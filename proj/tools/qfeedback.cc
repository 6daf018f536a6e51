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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "qfb/harness.h"
#include "qfb/protocol.h"
#include "qfb/seqlang.h"

namespace {

using namespace qfb;

constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

// Thrown for bad input found before any simulation starts.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// InputError whose message already starts with file:line:col.
struct SourceError : InputError {
    using InputError::InputError;
};

struct DeviceFlags {
    std::optional<double> omega_qubit_ghz;
    std::optional<double> qubit_gap_ghz;
    std::optional<double> rabi_omega_mhz;
    std::optional<double> f_jba_ghz;
    std::optional<double> q_factor;
    std::optional<double> delta_high_mhz;
    std::optional<double> delta_low_mhz;
    std::optional<double> delta_omega_mhz;
    std::optional<double> projection_error;
    std::optional<double> assignment_error;
    std::optional<double> t1_us;
    std::optional<double> t2_us;
    std::string shift_curve;
    std::optional<double> readout_height_high;
    std::optional<double> readout_height_low;

    void add_to(CLI::App &app) {
        const char *g = "Device";
        app.add_option("--omega_qubit_ghz", omega_qubit_ghz, "Qubit frequency / 2pi [GHz]")->group(g);
        app.add_option("--qubit_gap_ghz", qubit_gap_ghz, "Qubit gap / 2pi [GHz]")->group(g);
        app.add_option("--rabi_omega_mhz", rabi_omega_mhz, "Rabi frequency / 2pi [MHz]")->group(g);
        app.add_option("--f_jba_ghz", f_jba_ghz, "JBA resonance [GHz]")->group(g);
        app.add_option("--q_factor", q_factor, "JBA quality factor")->group(g);
        app.add_option("--delta_high_mhz", delta_high_mhz, "Qubit shift while latched High / 2pi [MHz]")->group(g);
        app.add_option("--delta_low_mhz", delta_low_mhz, "Qubit shift while latched Low / 2pi [MHz]")->group(g);
        app.add_option("--delta_omega_mhz", delta_omega_mhz, "High minus Low shift / 2pi [MHz]")->group(g);
        app.add_option("--projection_error", projection_error, "Post-measurement flip probability")->group(g);
        app.add_option("--assignment_error", assignment_error, "Latch flip probability")->group(g);
        app.add_option("--t1_us", t1_us, "Energy relaxation time [us]")->group(g);
        app.add_option("--t2_us", t2_us, "Coherence time [us]")->group(g);
        app.add_option("--shift_curve", shift_curve, "Readout height to shift table (height shift_MHz)")
            ->group(g)
            ->check(CLI::ExistingFile);
        app.add_option("--readout_height_high", readout_height_high, "High-latch readout height")->group(g);
        app.add_option("--readout_height_low", readout_height_low, "Low-latch readout height")->group(g);
    }

    DeviceParams build(double default_delta_omega) const {
        constexpr double mhz = kTwoPi * 1e6;
        DeviceParams d;
        if (omega_qubit_ghz) d.omega_qubit = *omega_qubit_ghz * kTwoPi * 1e9;
        if (qubit_gap_ghz) d.qubit_gap = *qubit_gap_ghz * kTwoPi * 1e9;
        if (rabi_omega_mhz) d.rabi_omega = *rabi_omega_mhz * mhz;
        if (f_jba_ghz) d.jba.f_jba = *f_jba_ghz * 1e9;
        if (q_factor) d.jba.q_factor = *q_factor;
        if (projection_error) d.jba.projection_error = *projection_error;
        if (assignment_error) d.jba.assignment_error = *assignment_error;
        if (t1_us) d.t1 = *t1_us * 1e-6;
        if (t2_us) d.t2 = *t2_us * 1e-6;

        if (!shift_curve.empty()) {
            d.jba.shift_curve = ShiftCurve::load(shift_curve);
        }
        if (readout_height_high || readout_height_low) {
            if (!d.jba.shift_curve) {
                throw InputError("readout heights need --shift_curve");
            }
            if (readout_height_high) d.jba.delta_high = d.jba.shift_curve->at(*readout_height_high);
            if (readout_height_low) d.jba.delta_low = d.jba.shift_curve->at(*readout_height_low);
        }
        if (delta_low_mhz) d.jba.delta_low = *delta_low_mhz * mhz;
        if (delta_high_mhz && delta_omega_mhz) {
            throw InputError("set either delta_high_mhz or delta_omega_mhz, not both");
        }
        if (delta_high_mhz) {
            d.jba.delta_high = *delta_high_mhz * mhz;
        } else if (delta_omega_mhz) {
            d.jba.delta_high = d.jba.delta_low + *delta_omega_mhz * mhz;
        } else if (!readout_height_high) {
            d.jba.delta_high = d.jba.delta_low + default_delta_omega;
        }
        d.validate();
        return d;
    }
};

struct CommonFlags {
    uint64_t seed = 0;
    uint64_t shots = 1000;
    std::string out;
    unsigned workers = 1;
};

std::string format_complex(std::complex<double> z) {
    return fmt::format("{:+.6f}{:+.6f}i", z.real(), z.imag());
}

double parse_angle(const std::string &text, const char *flag) {
    try {
        return seq::parse_quantity(text, seq::Dimension::Angle).value;
    } catch (const seq::ParseError &e) {
        throw InputError(fmt::format("{}: {}", flag, e.message()));
    }
}

// Writes to --out when given, else stdout.
void emit(const CommonFlags &common, const std::string &text) {
    if (common.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(common.out, std::ios::binary);
    if (!f) {
        throw InputError("cannot open '" + common.out + "' for writing");
    }
    f << text;
}

void check_out_writable(const CommonFlags &common) {
    if (common.out.empty()) {
        return;
    }
    std::ofstream f(common.out, std::ios::binary | std::ios::app);
    if (!f) {
        throw InputError("cannot open '" + common.out + "' for writing");
    }
}

std::string read_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw InputError("cannot read '" + path + "'");
    }
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

PulseSchedule load_sequence(const std::string &path, const DeviceParams &device) {
    std::string text = read_file(path);
    try {
        return seq::lower(seq::parse(text), device);
    } catch (const seq::ParseError &e) {
        throw SourceError(fmt::format("{}:{}:{}: error: {}", path, e.position().line, e.position().column,
                                     e.message()));
    }
}

void print_branch(const char *name, const PureState &s) {
    BlochVector b = to_bloch(s);
    auto clean = [](double v) { return std::abs(v) < 5e-13 ? 0.0 : v; };
    fmt::print("{} branch: ({})|g> + ({})|e>  bloch=({:.6f}, {:.6f}, {:.6f})\n", name, format_complex(s.amp_g()),
               format_complex(s.amp_e()), clean(b.x), clean(b.y), clean(b.z));
}

std::vector<double> ns_to_seconds(const std::vector<double> &v) {
    std::vector<double> out;
    for (double x : v) {
        out.push_back(x * 1e-9);
    }
    return out;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Pulse-level simulator for on-chip measurement-conditioned qubit feedback"};
    app.set_config("--config", "", "Key = value configuration file");
    app.require_subcommand(1);
    app.fallthrough();

    DeviceFlags device_flags;
    device_flags.add_to(app);
    CommonFlags common;
    app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
    app.add_option("--shots", common.shots, "Shots per run or grid point")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", common.out, "Output file (default: stdout)");
    app.add_option("--workers", common.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    // predict
    auto *predict = app.add_subcommand("predict", "Closed-form final states of the arbitrary-preparation sequence");
    std::string theta1 = "0", theta2 = "0", phi = "0";
    predict->add_option("--theta1", theta1, "Ground-branch angle (e.g. 90deg, 1.57rad, 1.57)");
    predict->add_option("--theta2", theta2, "Excited-branch angle");
    predict->add_option("--phi", phi, "Excited-branch phase");

    // run
    auto *run = app.add_subcommand("run", "Execute a .seq file shot by shot");
    std::string run_seq;
    run->add_option("sequence", run_seq, ".seq file")->required();
    bool finite_pulses = false;
    run->add_flag("--finite-pulses", finite_pulses, "Run rotations as finite detuned pulses");

    // validate
    auto *validate = app.add_subcommand("validate", "Parse and lower a .seq file without running it");
    std::string validate_seq;
    validate->add_option("sequence", validate_seq, ".seq file")->required();

    // ramsey
    auto *ramsey = app.add_subcommand("ramsey", "Ramsey fringes during a latched readout, both branches");
    double gap_start = 0, gap_stop = 20, gap_step = 0.1;
    ramsey->add_option("--gap_start_ns", gap_start)->capture_default_str();
    ramsey->add_option("--gap_stop_ns", gap_stop)->capture_default_str();
    ramsey->add_option("--gap_step_ns", gap_step)->capture_default_str();
    ramsey->add_flag("--finite-pulses", finite_pulses, "Run rotations as finite detuned pulses");

    // init-map
    auto *init_map = app.add_subcommand("init-map", "(tau1, tau2) map of the initialization sequence");
    double tau1_start = 0, tau1_stop = 6, tau1_step = 0.1;
    double tau2_start = 0, tau2_stop = 20, tau2_step = 0.25;
    double pi_duration_ns = 0.9, time_offset_ns = 0.8;
    init_map->add_option("--tau1_start_ns", tau1_start)->capture_default_str();
    init_map->add_option("--tau1_stop_ns", tau1_stop)->capture_default_str();
    init_map->add_option("--tau1_step_ns", tau1_step)->capture_default_str();
    init_map->add_option("--tau2_start_ns", tau2_start)->capture_default_str();
    init_map->add_option("--tau2_stop_ns", tau2_stop)->capture_default_str();
    init_map->add_option("--tau2_step_ns", tau2_step)->capture_default_str();
    init_map->add_option("--pi_duration_ns", pi_duration_ns, "Rabi calibration: pi pulse width")
        ->capture_default_str();
    init_map->add_option("--time_offset_ns", time_offset_ns, "Rabi calibration: time offset")->capture_default_str();
    init_map->add_flag("--finite-pulses", finite_pulses, "Run rotations as finite detuned pulses");

    // latency
    auto *latency = app.add_subcommand("latency", "Feedback latency budget");
    std::string latency_mode = "on-chip";
    double cable_length_m = 20, cable_delay_ns_per_m = 5, processing_ns = 0, tau_pi_ns = 5.5;
    std::optional<double> tau_jba_ns;
    latency->add_option("--mode", latency_mode)->check(CLI::IsMember({"on-chip", "off-chip"}))->capture_default_str();
    latency->add_option("--cable_length_m", cable_length_m)->capture_default_str();
    latency->add_option("--cable_delay_ns_per_m", cable_delay_ns_per_m)->capture_default_str();
    latency->add_option("--processing_ns", processing_ns)->capture_default_str();
    latency->add_option("--tau_pi_ns", tau_pi_ns, "Selective rotation time")->capture_default_str();
    latency->add_option("--tau_jba_ns", tau_jba_ns, "Latch time (default: q_factor / f_jba)");

    // calibrate
    auto *calibrate = app.add_subcommand("calibrate", "Fit the Rabi calibration to excited/ground anchor widths");
    std::vector<double> excited_ns{1.7, 3.5, 5.3}, ground_ns{2.6, 4.4};
    calibrate->add_option("--excited_ns", excited_ns, "Prep widths that leave the qubit excited")
        ->delimiter(',')
        ->capture_default_str();
    calibrate->add_option("--ground_ns", ground_ns, "Prep widths that leave the qubit in ground")
        ->delimiter(',')
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    bool computing = false;
    try {
        HarnessOptions hopts{.mode = finite_pulses ? PulseMode::FiniteDuration : PulseMode::Instantaneous,
                             .workers = common.workers};

        if (*predict) {
            FeedbackSpec spec;
            spec.theta1 = parse_angle(theta1, "--theta1");
            spec.theta2 = parse_angle(theta2, "--theta2");
            spec.phi = parse_angle(phi, "--phi");
            spec.validate();
            computing = true;
            print_branch("ground", predict_final(Branch::GroundDetected, spec));
            print_branch("excited", predict_final(Branch::ExcitedDetected, spec));
            return 0;
        }

        if (*validate) {
            DeviceParams device = device_flags.build(defaults::kRamseyShift);
            PulseSchedule sched = load_sequence(validate_seq, device);
            fmt::print("{}: ok ({} events, {:.6g} ns)\n", validate_seq, sched.events().size(),
                       sched.total_duration() * 1e9);
            return 0;
        }

        if (*run) {
            DeviceParams device = device_flags.build(defaults::kRamseyShift);
            PulseSchedule sched = load_sequence(run_seq, device);
            check_out_writable(common);
            computing = true;
            DecoherenceParams noise = sched.device().decoherence();
            SimOptions sim{.mode = hopts.mode};
            RandomSource rng(common.seed, 0);
            std::string csv = "shot,feedback_outcome,measured_outcome,final_p_excited\n";
            double sum_pe = 0;
            uint64_t measured = 0, high = 0;
            for (uint64_t shot = 0; shot < common.shots; shot++) {
                std::vector<MeasurementRecord> readouts;
                std::optional<Outcome> m;
                double pe = 0;
                if (noise.enabled()) {
                    auto r = simulate_schedule(sched, DensityMatrix::from_pure(PureState::ground()), rng, sim, noise);
                    readouts = r.readouts;
                    m = r.measured_outcome();
                    pe = r.final_state.prob_excited();
                } else {
                    auto r = simulate_schedule(sched, PureState::ground(), rng, sim);
                    readouts = r.readouts;
                    m = r.measured_outcome();
                    pe = r.final_state.prob_excited();
                }
                sum_pe += pe;
                if (m) {
                    measured++;
                    high += *m == Outcome::High;
                }
                csv += fmt::format("{},{},{},{:.9g}\n", shot, readouts.empty() ? "" : to_string(readouts[0].outcome),
                                   m ? to_string(*m) : "", pe);
            }
            emit(common, csv);
            std::ostream &summary = common.out.empty() ? std::cerr : std::cout;
            summary << fmt::format("shots: {}\nfinal P(e): {:.6f}\n", common.shots,
                                   sum_pe / static_cast<double>(common.shots));
            if (measured > 0) {
                summary << fmt::format("measured P(high): {:.6f}\n",
                                       static_cast<double>(high) / static_cast<double>(measured));
            }
            return 0;
        }

        if (*ramsey) {
            DeviceParams device = device_flags.build(defaults::kRamseyShift);
            SweepSpec sweep{.axis1 = {"gap", gap_start * 1e-9, gap_stop * 1e-9, gap_step * 1e-9},
                            .axis2 = std::nullopt,
                            .shots_per_point = common.shots,
                            .seed = common.seed};
            sweep.validate();
            check_out_writable(common);
            computing = true;
            GridResult hi = ramsey_during_readout(RamseyPrep::PiPulse, sweep, device, hopts);
            GridResult lo = ramsey_during_readout(RamseyPrep::TwoPiPulse, sweep, device, hopts);
            std::string lo_csv = lo.to_csv();
            emit(common, hi.to_csv() + lo_csv.substr(lo_csv.find('\n') + 1));
            double f_hi = fringe_frequency(hi.p_excited, gap_step * 1e-9);
            double f_lo = fringe_frequency(lo.p_excited, gap_step * 1e-9);
            std::ostream &summary = common.out.empty() ? std::cerr : std::cout;
            summary << fmt::format("high-branch fringe: {:.4f} MHz\nlow-branch fringe: {:.4f} MHz\n", f_hi / 1e6,
                                   f_lo / 1e6);
            summary << fmt::format("fringe difference: {:.4f} MHz (configured {:.4f} MHz)\n", (f_hi - f_lo) / 1e6,
                                   device.jba.delta_omega() / kTwoPi / 1e6);
            return 0;
        }

        if (*init_map) {
            DeviceParams device = device_flags.build(defaults::kInitShift);
            SweepSpec sweep{.axis1 = {"tau1", tau1_start * 1e-9, tau1_stop * 1e-9, tau1_step * 1e-9},
                            .axis2 = SweepAxis{"tau2", tau2_start * 1e-9, tau2_stop * 1e-9, tau2_step * 1e-9},
                            .shots_per_point = common.shots,
                            .seed = common.seed};
            sweep.validate();
            RabiCalibration cal{.pi_duration = pi_duration_ns * 1e-9, .time_offset = time_offset_ns * 1e-9};
            if (!(cal.pi_duration > 0) || !(cal.time_offset >= 0)) {
                throw InputError("calibration needs pi_duration_ns > 0 and time_offset_ns >= 0");
            }
            check_out_writable(common);
            computing = true;
            GridResult grid = initialization_map(sweep, device, cal, device.decoherence(), hopts);
            emit(common, grid.to_csv());
            std::ostream &summary = common.out.empty() ? std::cerr : std::cout;
            summary << "convergence columns (min over tau1 of P(e) > 0.99):";
            bool any = false;
            for (size_t j = 0; j < grid.tau2.size(); j++) {
                auto col = grid.column(j);
                if (*std::min_element(col.begin(), col.end()) > 0.99) {
                    summary << fmt::format(" {:.6g}ns", grid.tau2[j] * 1e9);
                    any = true;
                }
            }
            summary << (any ? "\n" : " none\n");
            return 0;
        }

        if (*latency) {
            DeviceParams device = device_flags.build(defaults::kInitShift);
            LatencyModel m{.mode = latency_mode == "off-chip" ? LatencyMode::OffChip : LatencyMode::OnChip,
                           .cable_length = cable_length_m,
                           .cable_delay_rate = cable_delay_ns_per_m * 1e-9,
                           .processing_delay = processing_ns * 1e-9,
                           .tau_jba = tau_jba_ns ? *tau_jba_ns * 1e-9 : device.jba.tau_jba(),
                           .tau_pi = tau_pi_ns * 1e-9};
            m.validate();
            computing = true;
            LatencyReport r = latency_budget(m);
            if (common.out.empty()) {
                std::cout << r.to_table();
            } else {
                emit(common, r.to_csv());
                std::cout << r.to_table();
            }
            return 0;
        }

        if (*calibrate) {
            RabiCalibration cal = calibrate_rabi(ns_to_seconds(excited_ns), ns_to_seconds(ground_ns));
            computing = true;
            std::string text = fmt::format("pi_duration_ns = {:.6g}\ntime_offset_ns = {:.6g}\n",
                                           cal.pi_duration * 1e9, cal.time_offset * 1e9);
            emit(common, text);
            if (!common.out.empty()) {
                std::cout << text;
            }
            return 0;
        }
    } catch (const SourceError &e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception &e) {
        std::cerr << (computing ? "internal error: " : "error: ") << e.what() << "\n";
        return computing ? kExitInternal : kExitInput;
    }
    return kExitInternal;
}
