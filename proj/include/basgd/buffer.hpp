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

#pragma once

#include <span>
#include <vector>

#include "basgd/common.hpp"

namespace basgd {

/// Buffer index for worker `worker_id` among `num_buffers` buffers.
inline std::size_t assign_buffer(std::size_t worker_id, std::size_t num_buffers) {
    if (num_buffers == 0) throw InvalidParameter("assign_buffer: buffer count must be positive");
    return worker_id % num_buffers;
}

/// Running mean of the gradients received since the last zero-out.
struct BufferSlot {
    Vector h;
    std::size_t count = 0;
};

/**
 * The server's B buffers. Each accumulate updates the slot with the
 * incremental-mean recurrence h <- ((N-1) h + g) / N; a step is possible
 * once every slot has received at least one gradient.
**/
class BufferBank {
public:
    BufferBank(std::size_t num_buffers, std::size_t dimension);

    void accumulate(std::size_t buffer, std::span<const double> gradient);
    bool all_ready() const noexcept;
    void zero_out() noexcept;

    std::size_t size() const noexcept { return slots_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    BufferSlot const& slot(std::size_t b) const { return slots_.at(b); }

    /// Current running means, one per buffer, in buffer order.
    std::vector<Vector> candidates() const;

private:
    std::size_t dimension_;
    std::vector<BufferSlot> slots_;
};

}  // namespace basgd
