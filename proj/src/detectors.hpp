#pragma once

#include "sedkit/pipeline.hpp"

namespace sedkit {

void register_builtin_detectors(DetectorRegistry& registry);

}  // namespace sedkit
