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

#include "qfb/noise.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfb {

void DecoherenceParams::validate() const {
    if (t1 && !(*t1 > 0)) {
        throw std::invalid_argument("T1 must be positive");
    }
    if (t2 && !(*t2 > 0)) {
        throw std::invalid_argument("T2 must be positive");
    }
    if (t1 && t2 && *t2 > 2 * *t1) {
        throw std::invalid_argument("T2 must not exceed 2*T1");
    }
}

std::vector<Mat2> kraus_operators(double duration, const DecoherenceParams &noise) {
    if (!(duration >= 0)) {
        throw std::invalid_argument("decoherence duration must be non-negative");
    }
    noise.validate();
    if (!noise.enabled() || duration == 0) {
        return {Mat2::Identity()};
    }

    // Amplitude damping alone decays coherences as e^{-t/(2 T1)}; the rest comes
    // from pure dephasing with rate 1/T2 - 1/(2 T1).
    double gamma = noise.t1 ? 1.0 - std::exp(-duration / *noise.t1) : 0.0;
    double dephase_rate = 0;
    if (noise.t2) {
        dephase_rate = 1.0 / *noise.t2 - (noise.t1 ? 0.5 / *noise.t1 : 0.0);
    }
    double lambda = std::exp(-duration * dephase_rate);

    Mat2 a0;
    a0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - gamma);
    Mat2 a1;
    a1 << 0.0, std::sqrt(gamma), 0.0, 0.0;

    // Phase flip with survival amplitude lambda: K = sqrt((1+l)/2) I, sqrt((1-l)/2) sigma_z.
    double p_keep = std::sqrt((1.0 + lambda) / 2.0);
    double p_flip = std::sqrt(std::max(0.0, (1.0 - lambda) / 2.0));
    Mat2 z = pauli::z();

    std::vector<Mat2> ops;
    for (const Mat2 &a : {a0, a1}) {
        ops.push_back(p_keep * a);
        if (p_flip > 0) {
            ops.push_back(p_flip * z * a);
        }
    }
    return ops;
}

DensityMatrix apply_decoherence(const DensityMatrix &rho, double duration, const DecoherenceParams &noise) {
    if (!noise.enabled()) {
        if (!(duration >= 0)) {
            throw std::invalid_argument("decoherence duration must be non-negative");
        }
        return rho;
    }
    Mat2 out = Mat2::Zero();
    for (const Mat2 &k : kraus_operators(duration, noise)) {
        out += k * rho.matrix() * k.adjoint();
    }
    return DensityMatrix(Mat2(0.5 * (out + out.adjoint())));
}

}  // namespace qfb
