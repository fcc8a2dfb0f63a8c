#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "tiertraffic/frame.hpp"
#include "tiertraffic/raw_io.hpp"
#include "tiertraffic/scene.hpp"
#include "tiertraffic/weather.hpp"

namespace tiertraffic {

/// Random-access camera stream.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int width() const = 0;
  virtual int height() const = 0;
  virtual int channels() const = 0;
  virtual double fps() const = 0;
  virtual int frame_count() const = 0;
  virtual Frame frame(int index) = 0;

  double duration() const { return frame_count() / fps(); }
};

/// Scripted scene rendered on demand, with weather applied.
class SceneSource : public FrameSource {
 public:
  SceneSource(SceneScript script, VideoSpec spec, WeatherModel weather = WeatherModel::sunny());

  int width() const override { return renderer_.spec().width; }
  int height() const override { return renderer_.spec().height; }
  int channels() const override { return 3; }
  double fps() const override { return renderer_.spec().fps; }
  int frame_count() const override { return renderer_.frame_count(); }
  Frame frame(int index) override;

  const SceneRenderer& renderer() const { return renderer_; }
  const WeatherModel& weather() const { return weather_; }

 private:
  SceneRenderer renderer_;
  WeatherModel weather_;
};

class MemorySource : public FrameSource {
 public:
  /// Frames must be non-empty and share one shape.
  MemorySource(std::vector<Frame> frames, double fps);

  int width() const override { return frames_.front().width(); }
  int height() const override { return frames_.front().height(); }
  int channels() const override { return frames_.front().channels(); }
  double fps() const override { return fps_; }
  int frame_count() const override { return static_cast<int>(frames_.size()); }
  Frame frame(int index) override { return frames_.at(index); }

 private:
  std::vector<Frame> frames_;
  double fps_;
};

class RawFileSource : public FrameSource {
 public:
  explicit RawFileSource(const std::filesystem::path& path);

  int width() const override { return static_cast<int>(reader_.header().width); }
  int height() const override { return static_cast<int>(reader_.header().height); }
  int channels() const override { return static_cast<int>(reader_.header().channels); }
  double fps() const override { return reader_.header().fps(); }
  int frame_count() const override { return static_cast<int>(reader_.header().frame_count); }
  Frame frame(int index) override { return reader_.read(index); }

 private:
  RawSequenceReader reader_;
};

}  // namespace tiertraffic
