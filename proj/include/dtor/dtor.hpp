#pragma once

// Umbrella header for the DTOR pipeline.

#include "dtor/dataset.hpp"
#include "dtor/detect.hpp"
#include "dtor/eval.hpp"
#include "dtor/explain.hpp"
#include "dtor/json_io.hpp"
#include "dtor/neighborhood.hpp"
#include "dtor/rules.hpp"
#include "dtor/tree.hpp"
