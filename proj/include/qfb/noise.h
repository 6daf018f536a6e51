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

#ifndef QFB_NOISE_H
#define QFB_NOISE_H

#include <optional>
#include <vector>

#include "qfb/qubit.h"

namespace qfb {

/// Energy relaxation (t1) and total coherence decay (t2) times, seconds.
/// Either may be absent. When both are present, t2 <= 2 t1.
struct DecoherenceParams {
    std::optional<double> t1;
    std::optional<double> t2;

    bool enabled() const { return t1.has_value() || t2.has_value(); }
    void validate() const;
};

/// Kraus operators of amplitude damping (probability 1 - e^{-t/T1}, toward |g>)
/// followed by pure dephasing, chosen so coherences decay as e^{-t/T2} in total.
/// Returns {I} when noise is disabled.
std::vector<Mat2> kraus_operators(double duration, const DecoherenceParams &noise);

DensityMatrix apply_decoherence(const DensityMatrix &rho, double duration, const DecoherenceParams &noise);

}  // namespace qfb

#endif
