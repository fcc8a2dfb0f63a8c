#include "tiertraffic/raw_io.hpp"

#include <array>
#include <cstring>

namespace tiertraffic {
namespace {

constexpr std::array<char, 4> kMagic = {'T', 'T', 'F', 'V'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                     static_cast<char>((v >> 16) & 0xFF),
                                     static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_header(std::ostream& out, const RawHeader& h) {
  out.write(kMagic.data(), 4);
  put_u32(out, h.width);
  put_u32(out, h.height);
  put_u32(out, h.channels);
  put_u32(out, h.fps_numerator);
  put_u32(out, h.fps_denominator);
  put_u32(out, h.frame_count);
}

}  // namespace

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

RawSequenceReader::RawSequenceReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open raw sequence: " + path.string());
  in_.seekg(0, std::ios::end);
  file_size_ = static_cast<std::uint64_t>(in_.tellg());
  in_.seekg(0, std::ios::beg);

  std::array<unsigned char, RawHeader::kSize> buf{};
  in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
  const auto got = static_cast<std::uint64_t>(in_.gcount());
  if (got < 4) throw FormatError("truncated magic", got);
  if (std::memcmp(buf.data(), kMagic.data(), 4) != 0) throw FormatError("bad magic, expected TTFV", 0);
  if (got < RawHeader::kSize) throw FormatError("truncated header", got);

  header_.width = get_u32(&buf[4]);
  header_.height = get_u32(&buf[8]);
  header_.channels = get_u32(&buf[12]);
  header_.fps_numerator = get_u32(&buf[16]);
  header_.fps_denominator = get_u32(&buf[20]);
  header_.frame_count = get_u32(&buf[24]);

  if (header_.width == 0) throw FormatError("zero width", 4);
  if (header_.height == 0) throw FormatError("zero height", 8);
  if (header_.channels != 1 && header_.channels != 3) throw FormatError("channel count must be 1 or 3", 12);
  if (header_.fps_numerator == 0) throw FormatError("zero fps numerator", 16);
  if (header_.fps_denominator == 0) throw FormatError("zero fps denominator", 20);

  const std::uint64_t need =
      RawHeader::kSize + static_cast<std::uint64_t>(header_.frame_bytes()) * header_.frame_count;
  if (file_size_ < need) {
    const std::uint64_t whole = (file_size_ - RawHeader::kSize) / header_.frame_bytes();
    throw FormatError("truncated payload: frame " + std::to_string(whole) + " of " +
                          std::to_string(header_.frame_count) + " incomplete",
                      file_size_);
  }
}

Frame RawSequenceReader::read(int index) {
  if (index < 0 || static_cast<std::uint32_t>(index) >= header_.frame_count) {
    throw std::out_of_range("frame index out of range");
  }
  const std::uint64_t pos = RawHeader::kSize + static_cast<std::uint64_t>(header_.frame_bytes()) * index;
  Frame frame(static_cast<int>(header_.width), static_cast<int>(header_.height),
              static_cast<int>(header_.channels), index, index / header_.fps());
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(pos));
  auto data = frame.data();
  in_.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (static_cast<std::size_t>(in_.gcount()) != data.size()) {
    throw FormatError("truncated frame " + std::to_string(index), pos + static_cast<std::uint64_t>(in_.gcount()));
  }
  return frame;
}

RawSequenceWriter::RawSequenceWriter(const std::filesystem::path& path, int width, int height,
                                     int channels, std::uint32_t fps_numerator,
                                     std::uint32_t fps_denominator)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot create raw sequence: " + path.string());
  header_.width = static_cast<std::uint32_t>(width);
  header_.height = static_cast<std::uint32_t>(height);
  header_.channels = static_cast<std::uint32_t>(channels);
  header_.fps_numerator = fps_numerator;
  header_.fps_denominator = fps_denominator;
  write_header(out_, header_);
}

RawSequenceWriter::~RawSequenceWriter() {
  try {
    close();
  } catch (...) {
  }
}

void RawSequenceWriter::write(const Frame& frame) {
  if (closed_) throw std::logic_error("write after close");
  if (static_cast<std::uint32_t>(frame.width()) != header_.width ||
      static_cast<std::uint32_t>(frame.height()) != header_.height ||
      static_cast<std::uint32_t>(frame.channels()) != header_.channels) {
    throw std::invalid_argument("frame shape does not match raw sequence header");
  }
  auto data = frame.data();
  out_.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  ++header_.frame_count;
}

void RawSequenceWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.seekp(0);
  write_header(out_, header_);
  out_.close();
  if (!out_) throw std::runtime_error("failed writing raw sequence");
}

std::vector<Frame> load_raw_sequence(const std::filesystem::path& path) {
  RawSequenceReader reader(path);
  std::vector<Frame> frames;
  frames.reserve(reader.header().frame_count);
  for (std::uint32_t i = 0; i < reader.header().frame_count; ++i) {
    frames.push_back(reader.read(static_cast<int>(i)));
  }
  return frames;
}

void save_raw_sequence(const std::filesystem::path& path, const std::vector<Frame>& frames,
                       std::uint32_t fps_numerator, std::uint32_t fps_denominator) {
  if (frames.empty()) throw std::invalid_argument("cannot save an empty sequence");
  RawSequenceWriter writer(path, frames.front().width(), frames.front().height(),
                           frames.front().channels(), fps_numerator, fps_denominator);
  for (const auto& f : frames) writer.write(f);
  writer.close();
}

}  // namespace tiertraffic
