#pragma once

#include "magloc/data/trial.hpp"

namespace magloc::data {

/// Linear interpolation of every channel onto the uniform grid
/// t_first + n / rate covering [t_first, t_last]. Never extrapolates.
/// Sets rate_flagged if the median spacing afterwards deviates by more than 5%.
Trial resample_align(const Trial& trial, double target_rate_hz = kTargetRateHz);

}  // namespace magloc::data
