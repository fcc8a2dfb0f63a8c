#include "tiertraffic/frame_source.hpp"

#include <stdexcept>

namespace tiertraffic {

SceneSource::SceneSource(SceneScript script, VideoSpec spec, WeatherModel weather)
    : renderer_(std::move(script), spec), weather_(weather) {
  weather_.validate();
}

Frame SceneSource::frame(int index) {
  if (index < 0 || index >= frame_count()) throw std::out_of_range("frame index out of range");
  return apply_weather(renderer_.render(index), weather_);
}

MemorySource::MemorySource(std::vector<Frame> frames, double fps) : frames_(std::move(frames)), fps_(fps) {
  if (frames_.empty()) throw std::invalid_argument("empty stream");
  if (!(fps_ > 0.0)) throw std::invalid_argument("fps must be positive");
  for (const auto& f : frames_) {
    if (!f.same_shape(frames_.front())) throw std::invalid_argument("frames differ in shape");
  }
}

RawFileSource::RawFileSource(const std::filesystem::path& path) : reader_(path) {}

}  // namespace tiertraffic
