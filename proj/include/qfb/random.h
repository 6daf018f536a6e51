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

#ifndef QFB_RANDOM_H
#define QFB_RANDOM_H

#include <cstdint>
#include <random>

namespace qfb {

/// Reproducible random stream addressed by (seed, stream_index). The same pair
/// always yields the same draw sequence on every platform; distinct stream
/// indices give independent streams.
class RandomSource {
   public:
    RandomSource(uint64_t seed, uint64_t stream_index);

    uint64_t seed() const { return seed_; }
    uint64_t stream_index() const { return stream_; }

    /// Uniform double in [0, 1) with 53 random bits. Does not go through
    /// std::uniform_real_distribution, whose output is implementation-defined.
    double uniform();

    /// True with probability p.
    bool bernoulli(double p) { return uniform() < p; }

   private:
    uint64_t seed_;
    uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace qfb

#endif
