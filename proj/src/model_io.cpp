#include "tiertraffic/model_io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tiertraffic/raw_io.hpp"

namespace tiertraffic {
namespace {

static_assert(std::endian::native == std::endian::little, "blob layout assumes a little-endian host");

class Writer {
 public:
  void magic(const char (&m)[5]) { bytes(m, 4); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void component(const GaussianComponent& g, int dims) {
    for (int c = 0; c < dims; ++c) f64(g.mean[c]);
    for (int c = 0; c < dims; ++c) f64(g.variance[c]);
    f64(g.weight);
  }
  void blob(const std::vector<std::uint8_t>& b) {
    u64(b.size());
    out_.insert(out_.end(), b.begin(), b.end());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::uint64_t base = 0) : in_(in), base_(base) {}

  void expect_header(const char (&m)[5]) {
    need(4);
    if (std::memcmp(in_.data() + pos_, m, 4) != 0) fail(std::string("bad magic, expected ") + m);
    pos_ += 4;
    const std::uint64_t at = pos_;
    const std::uint32_t version = u32();
    if (version != kModelBlobVersion) {
      throw FormatError("unsupported blob version " + std::to_string(version), base_ + at);
    }
  }
  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  double f64() { return scalar<double>(); }
  GaussianComponent component(int dims) {
    GaussianComponent g;
    for (int c = 0; c < dims; ++c) g.mean[c] = f64();
    for (int c = 0; c < dims; ++c) g.variance[c] = f64();
    g.weight = f64();
    return g;
  }
  std::span<const std::uint8_t> blob() {
    const std::uint64_t n = u64();
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t absolute() const { return base_ + pos_; }
  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, base_ + pos_); }
  void finish() const {
    if (pos_ != in_.size()) fail("trailing bytes after model blob");
  }

 private:
  template <typename T>
  T scalar() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::uint64_t n) const {
    if (in_.size() - pos_ < n) fail("truncated model blob");
  }

  std::span<const std::uint8_t> in_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

// Runs a model mutation, turning invariant failures into FormatError at `offset`.
template <typename F>
void guarded(std::uint64_t offset, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), offset);
  }
}

template <typename Model>
void write_pixels(Writer& w, const Model& m) {
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const auto comps = m.components(x, y);
      w.u8(static_cast<std::uint8_t>(comps.size()));
      for (const auto& g : comps) w.component(g, m.dims());
    }
  }
}

template <typename Model>
void read_pixels(Reader& r, Model& m) {
  std::vector<GaussianComponent> comps;
  bool any = false;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const std::uint64_t at = r.absolute();
      const int n = r.u8();
      comps.clear();
      for (int k = 0; k < n; ++k) comps.push_back(r.component(m.dims()));
      if (n == 0) continue;
      any = true;
      guarded(at, [&] { m.set_components(x, y, comps); });
    }
  }
  if (any) m.mark_initialized();
}

}  // namespace

std::vector<std::uint8_t> save_model(const PixelMixtureModel& model) {
  Writer w;
  w.magic("TTBG");
  w.u32(kModelBlobVersion);
  w.u32(model.width());
  w.u32(model.height());
  w.u32(model.dims());
  const auto& p = model.params();
  w.u32(p.components);
  w.f64(p.learning_rate);
  w.f64(p.match_sigma);
  w.f64(p.variance_floor);
  w.f64(p.initial_variance);
  write_pixels(w, model);
  return w.take();
}

PixelMixtureModel load_background_model(std::span<const std::uint8_t> blob) {
  Reader r(blob);
  r.expect_header("TTBG");
  const std::uint64_t at = r.absolute();
  const int width = static_cast<int>(r.u32());
  const int height = static_cast<int>(r.u32());
  const int dims = static_cast<int>(r.u32());
  MixtureParams p;
  p.components = static_cast<int>(r.u32());
  p.learning_rate = r.f64();
  p.match_sigma = r.f64();
  p.variance_floor = r.f64();
  p.initial_variance = r.f64();
  PixelMixtureModel model;
  guarded(at, [&] { model = PixelMixtureModel(width, height, dims, p); });
  read_pixels(r, model);
  r.finish();
  return model;
}

std::vector<std::uint8_t> save_model(const AdaptiveMixtureModel& model) {
  Writer w;
  w.magic("TTAM");
  w.u32(kModelBlobVersion);
  w.u32(model.width());
  w.u32(model.height());
  w.u32(model.dims());
  const auto& p = model.params();
  w.u32(p.max_components);
  for (double v : {p.background_ratio, p.match_threshold, p.generate_threshold, p.initial_variance,
                   p.min_variance, p.max_variance, p.complexity_prior, p.absorption_seconds, p.fps}) {
    w.f64(v);
  }
  w.f64(0.0);  // reserved
  write_pixels(w, model);
  return w.take();
}

AdaptiveMixtureModel load_adaptive_model(std::span<const std::uint8_t> blob) {
  Reader r(blob);
  r.expect_header("TTAM");
  const std::uint64_t at = r.absolute();
  const int width = static_cast<int>(r.u32());
  const int height = static_cast<int>(r.u32());
  const int dims = static_cast<int>(r.u32());
  AdaptiveParams p;
  p.max_components = static_cast<int>(r.u32());
  for (double* v : {&p.background_ratio, &p.match_threshold, &p.generate_threshold, &p.initial_variance,
                    &p.min_variance, &p.max_variance, &p.complexity_prior, &p.absorption_seconds, &p.fps}) {
    *v = r.f64();
  }
  r.f64();
  AdaptiveMixtureModel model;
  guarded(at, [&] { model = AdaptiveMixtureModel(width, height, dims, p); });
  read_pixels(r, model);
  r.finish();
  return model;
}

std::vector<std::uint8_t> save_model(const GlobalForegroundModel& model) {
  Writer w;
  w.magic("TTFG");
  w.u32(kModelBlobVersion);
  w.u32(model.dims());
  const auto& p = model.params();
  w.u32(p.components);
  w.f64(p.learning_rate);
  w.f64(p.creation_sigma);
  w.f64(p.variance_floor);
  w.f64(p.initial_variance);
  const auto comps = model.components();
  w.u32(static_cast<std::uint32_t>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    w.component(comps[i], model.dims());
    w.u64(model.sample_counts()[i]);
  }
  return w.take();
}

GlobalForegroundModel load_foreground_model(std::span<const std::uint8_t> blob) {
  Reader r(blob);
  r.expect_header("TTFG");
  const std::uint64_t at = r.absolute();
  const int dims = static_cast<int>(r.u32());
  ForegroundParams p;
  p.components = static_cast<int>(r.u32());
  p.learning_rate = r.f64();
  p.creation_sigma = r.f64();
  p.variance_floor = r.f64();
  p.initial_variance = r.f64();
  GlobalForegroundModel model;
  guarded(at, [&] { model = GlobalForegroundModel(dims, p); });
  const std::uint64_t count_at = r.absolute();
  const std::uint32_t n = r.u32();
  if (n > static_cast<std::uint32_t>(p.components)) throw FormatError("too many foreground components", count_at);
  std::vector<GaussianComponent> comps;
  std::vector<std::uint64_t> counts;
  for (std::uint32_t i = 0; i < n; ++i) {
    comps.push_back(r.component(dims));
    counts.push_back(r.u64());
  }
  guarded(count_at, [&] { model.restore(std::move(comps), std::move(counts)); });
  r.finish();
  return model;
}

std::vector<std::uint8_t> save_model(const GfmDetector& detector) {
  Writer w;
  w.magic("TTGD");
  w.u32(kModelBlobVersion);
  w.u32(static_cast<std::uint32_t>(detector.params().bootstrap_frames));
  w.u32(static_cast<std::uint32_t>(detector.frames_seen()));
  w.f64(detector.params().seed_sigma);
  w.blob(save_model(detector.background()));
  w.blob(save_model(detector.foreground()));
  return w.take();
}

GfmDetector load_gfm_detector(std::span<const std::uint8_t> blob) {
  Reader r(blob);
  r.expect_header("TTGD");
  GfmDetectorParams p;
  p.bootstrap_frames = static_cast<int>(r.u32());
  const int frames_seen = static_cast<int>(r.u32());
  p.seed_sigma = r.f64();
  const std::uint64_t bg_at = r.absolute() + 8;
  const auto bg_blob = r.blob();
  const std::uint64_t fg_at = r.absolute() + 8;
  const auto fg_blob = r.blob();
  r.finish();

  auto rebase = [](std::uint64_t base, auto&& load) {
    try {
      return load();
    } catch (const FormatError& e) {
      throw FormatError(e.what(), base + e.offset());
    }
  };
  PixelMixtureModel bg = rebase(bg_at, [&] { return load_background_model(bg_blob); });
  GlobalForegroundModel fg = rebase(fg_at, [&] { return load_foreground_model(fg_blob); });
  p.background = bg.params();
  p.foreground = fg.params();
  GfmDetector det(bg.width(), bg.height(), bg.dims(), p);
  if (fg.dims() != bg.dims()) throw FormatError("foreground and background dimensions differ", fg_at);
  det.background() = std::move(bg);
  det.foreground() = std::move(fg);
  det.set_frames_seen(frames_seen);
  return det;
}

void write_blob(const std::filesystem::path& path, std::span<const std::uint8_t> blob) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_pgm(const std::filesystem::path& path, const ForegroundMask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  for (std::uint8_t b : mask.bits()) out.put(static_cast<char>(b ? 255 : 0));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ForegroundMask read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_blob(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    const std::size_t start = pos;
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start || v <= 0 || v > 1 << 20) throw FormatError("bad PGM header field", start);
    return static_cast<int>(v);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("not a P5 PGM", 0);
  pos = 2;
  const int w = number();
  const int h = number();
  const int maxval = number();
  if (maxval > 255) throw FormatError("16-bit PGM not supported", pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("bad PGM header", pos);
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h;
  if (bytes.size() - pos < need) throw FormatError("truncated PGM data", bytes.size());
  ForegroundMask mask(w, h);
  for (std::size_t i = 0; i < need; ++i) mask.bits()[i] = bytes[pos + i] ? 1 : 0;
  return mask;
}

}  // namespace tiertraffic
