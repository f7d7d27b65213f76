#pragma once

#include <vector>

#include "magloc/evalkit/metrics.hpp"
#include "magloc/features/windows.hpp"
#include "magloc/magnet/model.hpp"

namespace magloc::evalkit {

/// Forward pass over every window of an already standardized set, in
/// fixed-size batches so results do not depend on the set size.
std::vector<Point> predict_windows(const magnet::Model& model, const features::WindowSet& standardized,
                                   std::size_t batch = 128);

std::vector<Point> targets_of(const features::WindowSet& windows);

}  // namespace magloc::evalkit
