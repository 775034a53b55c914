#pragma once

// Convenience include of the whole library.

#include "analysis.hpp"
#include "augment.hpp"
#include "coeff_maps.hpp"
#include "common.hpp"
#include "correlation.hpp"
#include "dct.hpp"
#include "enhance.hpp"
#include "jpeg/decode.hpp"
#include "jpeg/encode.hpp"
#include "jpeg/huffman.hpp"
#include "jpeg/pixels.hpp"
#include "jpeg/tables.hpp"
#include "jpeg/types.hpp"
#include "jpeg/zigzag.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "pnm.hpp"
#include "weights.hpp"
