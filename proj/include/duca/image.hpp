#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace duca {

// H x W x 3 image, row-major HWC, values in [0, 1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  static constexpr int channels = 3;

  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return data.empty(); }
};

ImageTensor make_image(int height, int width, float fill = 0.0f);

// Throws InvalidInput on degenerate dimensions or size/dimension mismatch.
void validate_image(const ImageTensor& img);

struct PatchRect {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
};

struct Variant {
  std::string tag;
  ImageTensor image;
};

// Tags of the 16 augmentation variants, in output order.
const std::array<std::string, 16>& variant_tags();

// Scales so the smaller dimension lands exactly on `target` (bilinear);
// returns a copy when it already does.
ImageTensor rescale_min_side(const ImageTensor& img, int target);

ImageTensor hflip(const ImageTensor& img);
ImageTensor crop(const ImageTensor& img, int y0, int x0, int out_h, int out_w);

// Rotates about the image center and crops to the largest axis-aligned
// interior rectangle, so no fill pixels survive. |radians| < pi/2.
ImageTensor rotate_cropped(const ImageTensor& img, double radians);

// 1 original + 5 two-thirds crops (corners + center) + 2 pi/6 rotations
// (CCW then CW), then the horizontal flip of each in the same order.
std::vector<Variant> augment(const ImageTensor& img);

// Window positions at offsets {0, stride, 2*stride, ...} per axis,
// row-major. Count per axis is floor((L - window) / stride) + 1.
std::vector<PatchRect> patch_grid(int height, int width, int window, int stride);

struct PatchConfig {
  int rescale = 700;
  int window = 224;
  int stride = 32;
};

std::vector<std::pair<PatchRect, ImageTensor>> extract_patches(
    const ImageTensor& img, const PatchConfig& config = {});

}  // namespace duca
