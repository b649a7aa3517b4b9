#pragma once

// Umbrella header. The ONNX backend lives in <deepstq/onnx_backend.hpp>
// and needs OpenCV.

#include "deepstq/aggregate.hpp"
#include "deepstq/error.hpp"
#include "deepstq/features.hpp"
#include "deepstq/harness/bundle.hpp"
#include "deepstq/harness/cache.hpp"
#include "deepstq/harness/experiment.hpp"
#include "deepstq/harness/manifest.hpp"
#include "deepstq/harness/pipeline.hpp"
#include "deepstq/harness/report.hpp"
#include "deepstq/harness/split.hpp"
#include "deepstq/image.hpp"
#include "deepstq/metrics.hpp"
#include "deepstq/svr.hpp"
#include "deepstq/svr_io.hpp"
#include "deepstq/synthetic.hpp"
#include "deepstq/video_io.hpp"
#include "deepstq/views.hpp"
