#pragma once

#include "hdrfuse/calibration.hpp"
#include "hdrfuse/controller.hpp"
#include "hdrfuse/fusion.hpp"
#include "hdrfuse/harness.hpp"
#include "hdrfuse/image_io.hpp"
#include "hdrfuse/map_buffer.hpp"
#include "hdrfuse/packing.hpp"
#include "hdrfuse/radiometry.hpp"
#include "hdrfuse/report.hpp"
#include "hdrfuse/rng.hpp"
#include "hdrfuse/sensorsim.hpp"
#include "hdrfuse/types.hpp"
