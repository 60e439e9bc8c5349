#pragma once

#include <acface/annotation.hpp>
#include <acface/contourness.hpp>
#include <acface/evaluation.hpp>
#include <acface/extraction.hpp>
#include <acface/geometry.hpp>
#include <acface/io.hpp>
#include <acface/losses.hpp>
#include <acface/parallel.hpp>
#include <acface/raster.hpp>
#include <acface/synthscene.hpp>
