#pragma once

#include "stsum/binning.hpp"
#include "stsum/dataset.hpp"
#include "stsum/error.hpp"
#include "stsum/features.hpp"
#include "stsum/field.hpp"
#include "stsum/fusion.hpp"
#include "stsum/generate.hpp"
#include "stsum/image_io.hpp"
#include "stsum/infotheory.hpp"
#include "stsum/pipeline.hpp"
#include "stsum/probability.hpp"
#include "stsum/render.hpp"
