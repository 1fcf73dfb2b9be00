#include "rigkit/frames.hpp"

#include <algorithm>
#include <cmath>

namespace rigkit {

namespace {

void check_buffer_size(std::size_t actual, int width, int height, const char* what) {
  if (width <= 0 || height <= 0 ||
      actual != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    raise(ErrorCode::DimensionMismatch, std::string(what) + " buffer length must equal width*height");
  }
}

}  // namespace

DepthFrame::DepthFrame(DepthMode mode, int width, int height, std::vector<std::uint16_t> buffer,
                       Timestamp timestamp, double exposure, double gain)
    : mode(mode),
      width(width),
      height(height),
      buffer(std::move(buffer)),
      timestamp(timestamp),
      exposure(exposure),
      gain(gain) {
  check_buffer_size(this->buffer.size(), width, height, "depth");
}

SigmaBuffer::SigmaBuffer(int width, int height, std::vector<std::uint8_t> buffer)
    : width(width), height(height), buffer(std::move(buffer)) {
  check_buffer_size(this->buffer.size(), width, height, "sigma");
}

AbFrame::AbFrame(DepthMode mode, int width, int height, std::vector<std::uint16_t> buffer,
                 Timestamp timestamp)
    : mode(mode), width(width), height(height), buffer(std::move(buffer)), timestamp(timestamp) {
  check_buffer_size(this->buffer.size(), width, height, "active brightness");
}

VlcFrame::VlcFrame(std::vector<std::uint8_t> buffer, Timestamp timestamp, double exposure,
                   double gain)
    : buffer(std::move(buffer)), timestamp(timestamp), exposure(exposure), gain(gain) {
  if (this->buffer.size() != static_cast<std::size_t>(kVlcWidth) * kVlcHeight) {
    raise(ErrorCode::DimensionMismatch, "VLC frames are exactly 640x480");
  }
}

ImuBatch::ImuBatch(ImuKind kind, std::vector<ImuSample> samples,
                   std::optional<double> temperature_c)
    : kind(kind), samples(std::move(samples)), temperature_c(temperature_c) {
  for (std::size_t i = 1; i < this->samples.size(); ++i) {
    if (!(this->samples[i - 1].t < this->samples[i].t)) {
      raise(ErrorCode::NonMonotonicTimestamp, "IMU sample timestamps must strictly increase");
    }
  }
  if (kind == ImuKind::Mag && this->temperature_c.has_value()) {
    raise(ErrorCode::DomainError, "magnetometer batches carry no temperature");
  }
}

DepthFrame validate_long_throw(const DepthFrame& depth, const SigmaBuffer& sigma) {
  if (depth.mode != DepthMode::LongThrow) {
    raise(ErrorCode::ModeMismatch, "sigma validation applies to Long Throw frames only");
  }
  if (depth.width != sigma.width || depth.height != sigma.height) {
    raise(ErrorCode::DimensionMismatch, "sigma buffer shape must match the depth frame");
  }
  DepthFrame out = depth;
  for (std::size_t i = 0; i < out.buffer.size(); ++i) {
    if ((sigma.buffer[i] & kSigmaInvalidMask) != 0) out.buffer[i] = 0;
  }
  return out;
}

DecodedDepth decode_ahat(const DepthFrame& depth) {
  if (depth.mode != DepthMode::Ahat) {
    raise(ErrorCode::ModeMismatch, "expected an AHAT frame");
  }
  DecodedDepth out;
  out.width = depth.width;
  out.height = depth.height;
  out.range_m.resize(depth.buffer.size(), 0.0f);
  out.valid.resize(depth.buffer.size(), 0);
  for (std::size_t i = 0; i < depth.buffer.size(); ++i) {
    const std::uint16_t raw = depth.buffer[i];
    if (raw <= kAhatMaxMm) {
      out.valid[i] = 1;
      out.range_m[i] = static_cast<float>(raw) / 1000.0f;
    }
  }
  return out;
}

DecodedDepth decode_long_throw(const DepthFrame& depth) {
  if (depth.mode != DepthMode::LongThrow) {
    raise(ErrorCode::ModeMismatch, "expected a Long Throw frame");
  }
  DecodedDepth out;
  out.width = depth.width;
  out.height = depth.height;
  out.range_m.resize(depth.buffer.size(), 0.0f);
  out.valid.resize(depth.buffer.size(), 0);
  for (std::size_t i = 0; i < depth.buffer.size(); ++i) {
    const std::uint16_t raw = depth.buffer[i];
    if (raw > 0 && raw <= kLongThrowMaxMm) {
      out.valid[i] = 1;
      out.range_m[i] = static_cast<float>(raw) / 1000.0f;
    }
  }
  return out;
}

double unwrap_ahat(double wrapped_m, double hint_m) {
  if (!(wrapped_m >= 0.0 && wrapped_m < kAhatWrapMeters) || !(hint_m >= 0.0)) {
    raise(ErrorCode::DomainError, "unwrap needs 0 <= wrapped < 1 and hint >= 0");
  }
  const double k_real = hint_m - wrapped_m;
  const double k_lo = std::max(0.0, std::floor(k_real));
  const double k_hi = k_lo + 1.0;
  const double err_lo = std::abs(wrapped_m + k_lo - hint_m);
  const double err_hi = std::abs(wrapped_m + k_hi - hint_m);
  return wrapped_m + (err_hi < err_lo ? k_hi : k_lo);
}

std::vector<std::uint8_t> ab_to_visual(const AbFrame& ab, double gamma) {
  if (!(gamma > 0.0)) raise(ErrorCode::DomainError, "gamma must be positive");
  std::vector<std::uint8_t> out(ab.buffer.size(), 0);
  if (ab.buffer.empty()) return out;
  const auto [mn_it, mx_it] = std::minmax_element(ab.buffer.begin(), ab.buffer.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  if (mx <= mn) return out;  // constant image -> all zeros
  const double scale = 1.0 / (mx - mn);
  for (std::size_t i = 0; i < ab.buffer.size(); ++i) {
    const double t = std::pow((ab.buffer[i] - mn) * scale, gamma);
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
  }
  return out;
}

}  // namespace rigkit
