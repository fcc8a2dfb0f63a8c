#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiertraffic/frame.hpp"

namespace tiertraffic {

/// Malformed or truncated raw sequence. `offset()` is the byte position at
/// which decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Header of a "TTFV" raw sequence: magic then six little-endian u32 fields.
struct RawHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::uint32_t fps_numerator = 15;
  std::uint32_t fps_denominator = 1;
  std::uint32_t frame_count = 0;

  static constexpr std::size_t kSize = 4 + 6 * 4;
  double fps() const { return static_cast<double>(fps_numerator) / fps_denominator; }
  std::size_t frame_bytes() const {
    return static_cast<std::size_t>(width) * height * channels;
  }
};

/// Streams frames out of a raw sequence file without loading it whole.
class RawSequenceReader {
 public:
  explicit RawSequenceReader(const std::filesystem::path& path);

  const RawHeader& header() const { return header_; }
  /// Reads frame `index`. Timestamps are index / fps.
  Frame read(int index);

 private:
  std::ifstream in_;
  std::uint64_t file_size_ = 0;
  RawHeader header_;
};

/// Writes frames incrementally; the frame count in the header is patched on close.
class RawSequenceWriter {
 public:
  RawSequenceWriter(const std::filesystem::path& path, int width, int height, int channels,
                    std::uint32_t fps_numerator, std::uint32_t fps_denominator = 1);
  ~RawSequenceWriter();
  RawSequenceWriter(const RawSequenceWriter&) = delete;
  RawSequenceWriter& operator=(const RawSequenceWriter&) = delete;

  void write(const Frame& frame);
  void close();

 private:
  std::ofstream out_;
  RawHeader header_;
  bool closed_ = false;
};

std::vector<Frame> load_raw_sequence(const std::filesystem::path& path);
void save_raw_sequence(const std::filesystem::path& path, const std::vector<Frame>& frames,
                       std::uint32_t fps_numerator, std::uint32_t fps_denominator = 1);

}  // namespace tiertraffic
