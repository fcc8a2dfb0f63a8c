#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tiertraffic/detector.hpp"
#include "tiertraffic/mixture_model.hpp"

namespace tiertraffic {

/// Model blobs. All integers and doubles are little-endian.
///
///   magic[4] version:u32 kind-specific header, then payload
///
///   "TTBG" background mixture: width height dims K:u32, learning_rate
///          match_sigma variance_floor initial_variance:f64, then per pixel
///          (row-major) count:u8 followed by count components
///   "TTAM" adaptive mixture: width height dims max_components:u32, the nine f64
///          fields of AdaptiveParams in declaration order, one reserved f64,
///          then pixels as above
///   "TTFG" foreground model: dims L:u32, learning_rate creation_sigma
///          variance_floor initial_variance:f64, count:u32, then count times
///          (component, samples:u64)
///   "TTGD" GFM detector: bootstrap_frames frames_seen:u32, seed_sigma:f64,
///          then length-prefixed (u64) "TTBG" and "TTFG" blobs
///
/// A component is mean[dims], variance[dims], weight, all f64.
constexpr std::uint32_t kModelBlobVersion = 1;

std::vector<std::uint8_t> save_model(const PixelMixtureModel& model);
std::vector<std::uint8_t> save_model(const AdaptiveMixtureModel& model);
std::vector<std::uint8_t> save_model(const GlobalForegroundModel& model);
std::vector<std::uint8_t> save_model(const GfmDetector& detector);

/// Each loader throws FormatError (with the failing byte offset) on a bad
/// magic, unsupported version, truncation or invariant violation.
PixelMixtureModel load_background_model(std::span<const std::uint8_t> blob);
AdaptiveMixtureModel load_adaptive_model(std::span<const std::uint8_t> blob);
GlobalForegroundModel load_foreground_model(std::span<const std::uint8_t> blob);
GfmDetector load_gfm_detector(std::span<const std::uint8_t> blob);

void write_blob(const std::filesystem::path& path, std::span<const std::uint8_t> blob);
std::vector<std::uint8_t> read_blob(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255); set pixels are written as 255.
void write_pgm(const std::filesystem::path& path, const ForegroundMask& mask);
/// Any nonzero sample reads back as set.
ForegroundMask read_pgm(const std::filesystem::path& path);

}  // namespace tiertraffic
