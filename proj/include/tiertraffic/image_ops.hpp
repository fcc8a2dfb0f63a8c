#pragma once

#include "tiertraffic/frame.hpp"

namespace tiertraffic {

/// Area-averaging resample. Each output pixel is the overlap-weighted mean of
/// the source pixels under its footprint, rounded to nearest. Integer
/// decimation factors therefore give exact block means.
Frame resize(const Frame& frame, int width, int height);

/// RGB -> intensity by channel mean, round((R + G + B) / 3). Single-channel
/// frames are returned unchanged.
Frame to_intensity(const Frame& frame);

}  // namespace tiertraffic
