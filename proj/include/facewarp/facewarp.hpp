#ifndef FACEWARP_FACEWARP_HPP
#define FACEWARP_FACEWARP_HPP

#include "facewarp/error.hpp"
#include "facewarp/geometry.hpp"
#include "facewarp/landmarks.hpp"
#include "facewarp/imaging.hpp"
#include "facewarp/png_io.hpp"
#include "facewarp/expansion.hpp"
#include "facewarp/mls.hpp"
#include "facewarp/shrink.hpp"
#include "facewarp/pipeline.hpp"

#endif  // FACEWARP_FACEWARP_HPP
