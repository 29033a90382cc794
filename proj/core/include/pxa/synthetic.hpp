#pragma once

#include <cstddef>
#include <vector>

#include "pxa/postprocess.hpp"
#include "pxa/rng.hpp"

namespace pxa {

/// Random NMS workload: jittered copies of a few dozen rotated boxes with
/// uniform scores and mixed sources, the shape of raw detector output.
std::vector<Detection> random_candidates(CounterRng& rng, std::size_t count, double image_w,
                                         double image_h);

}  // namespace pxa
