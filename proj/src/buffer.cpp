/* Copyright 2026 The BASGD Simulator Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "basgd/buffer.hpp"

#include <algorithm>

namespace basgd {

BufferBank::BufferBank(std::size_t num_buffers, std::size_t dimension) : dimension_(dimension) {
    if (num_buffers == 0) throw InvalidParameter("buffer bank: buffer count must be positive");
    if (dimension == 0) throw InvalidParameter("buffer bank: dimension must be positive");
    slots_.resize(num_buffers, BufferSlot{Vector(dimension, 0.0), 0});
}

void BufferBank::accumulate(std::size_t buffer, std::span<const double> gradient) {
    if (gradient.size() != dimension_)
        throw InvalidInput("buffer bank: gradient dimension " + std::to_string(gradient.size()) +
                           " != " + std::to_string(dimension_));
    auto& slot = slots_.at(buffer);
    ++slot.count;
    auto const n = static_cast<double>(slot.count);
    for (std::size_t j = 0; j < dimension_; ++j) slot.h[j] = ((n - 1.0) * slot.h[j] + gradient[j]) / n;
}

bool BufferBank::all_ready() const noexcept {
    return std::all_of(slots_.begin(), slots_.end(), [](BufferSlot const& s) { return s.count > 0; });
}

void BufferBank::zero_out() noexcept {
    for (auto& s : slots_) {
        std::fill(s.h.begin(), s.h.end(), 0.0);
        s.count = 0;
    }
}

std::vector<Vector> BufferBank::candidates() const {
    std::vector<Vector> out;
    out.reserve(slots_.size());
    for (auto const& s : slots_) out.push_back(s.h);
    return out;
}

}  // namespace basgd
