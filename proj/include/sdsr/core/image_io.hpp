#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// 8-bit interleaved image as stored on disk (PNG).
struct ImageU8 {
  int w = 0, h = 0, c = 0;  // c is 1 (gray) or 3 (rgb)
  std::vector<uint8_t> px;  // h * w * c, row major, channel interleaved
};

ImageU8 read_png(const std::string& path);
void write_png(const std::string& path, const ImageU8& img);

// promote to [0,1] planar tensor of shape (1, c, h, w)
Tensor to_unit_tensor(const ImageU8& img);

// quantize one batch entry back to 8 bit (round + clamp)
ImageU8 to_u8(const Tensor& t, int batch_index = 0);

ImageBatch load_image(const std::string& path);                 // (1,c,h,w) in [0,1]
void save_image(const std::string& path, const ImageBatch& t, int batch_index = 0);

}  // namespace sdsr
