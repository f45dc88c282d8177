#include "duca/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "duca/error.hpp"

namespace duca {

namespace {

float bilinear_sample(const ImageTensor& img, double y, double x, int c) {
  const double yc = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const double xc = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const int y0 = static_cast<int>(yc);
  const int x0 = static_cast<int>(xc);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const double fy = yc - y0;
  const double fx = xc - x0;
  const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
  const double bot = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
  return static_cast<float>(top * (1.0 - fy) + bot * fy);
}

ImageTensor resample(const ImageTensor& img, int out_h, int out_w) {
  ImageTensor out = make_image(out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_w; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < ImageTensor::channels; ++c) {
        out.at(y, x, c) = bilinear_sample(img, src_y, src_x, c);
      }
    }
  }
  return out;
}

// Largest axis-aligned rectangle inside a w x h rectangle rotated by
// `angle`, the classic two-case construction (constrained by the short
// side, or by both rotated edges).
std::pair<double, double> max_interior_rect(double w, double h, double angle) {
  const double sin_a = std::fabs(std::sin(angle));
  const double cos_a = std::fabs(std::cos(angle));
  const bool width_longer = w >= h;
  const double side_long = width_longer ? w : h;
  const double side_short = width_longer ? h : w;
  double wr, hr;
  if (side_short <= 2.0 * sin_a * cos_a * side_long ||
      std::fabs(sin_a - cos_a) < 1e-10) {
    const double x = 0.5 * side_short;
    wr = width_longer ? x / sin_a : x / cos_a;
    hr = width_longer ? x / cos_a : x / sin_a;
  } else {
    const double cos_2a = cos_a * cos_a - sin_a * sin_a;
    wr = (w * cos_a - h * sin_a) / cos_2a;
    hr = (h * cos_a - w * sin_a) / cos_2a;
  }
  return {wr, hr};
}

}  // namespace

ImageTensor make_image(int height, int width, float fill) {
  ImageTensor img;
  img.height = height;
  img.width = width;
  img.data.assign(static_cast<std::size_t>(height) * width * ImageTensor::channels, fill);
  return img;
}

void validate_image(const ImageTensor& img) {
  if (img.height < 1 || img.width < 1) {
    fail(ErrorKind::InvalidInput, "degenerate image: " + std::to_string(img.height) + "x" +
                                      std::to_string(img.width));
  }
  const std::size_t expect =
      static_cast<std::size_t>(img.height) * img.width * ImageTensor::channels;
  if (img.data.size() != expect) {
    fail(ErrorKind::InvalidInput, "image buffer size does not match dimensions");
  }
}

const std::array<std::string, 16>& variant_tags() {
  static const std::array<std::string, 16> tags = {
      "original",      "crop_tl",      "crop_tr",      "crop_bl",
      "crop_br",       "crop_c",       "rot_ccw",      "rot_cw",
      "flip_original", "flip_crop_tl", "flip_crop_tr", "flip_crop_bl",
      "flip_crop_br",  "flip_crop_c",  "flip_rot_ccw", "flip_rot_cw"};
  return tags;
}

ImageTensor rescale_min_side(const ImageTensor& img, int target) {
  validate_image(img);
  if (target < 1) fail(ErrorKind::InvalidInput, "rescale target must be >= 1");
  const int min_side = std::min(img.height, img.width);
  if (min_side == target) return img;
  const double scale = static_cast<double>(target) / min_side;
  int out_h, out_w;
  if (img.height <= img.width) {
    out_h = target;
    out_w = std::max(1, static_cast<int>(std::lround(img.width * scale)));
  } else {
    out_w = target;
    out_h = std::max(1, static_cast<int>(std::lround(img.height * scale)));
  }
  return resample(img, out_h, out_w);
}

ImageTensor hflip(const ImageTensor& img) {
  validate_image(img);
  ImageTensor out = make_image(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < ImageTensor::channels; ++c) {
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
      }
    }
  }
  return out;
}

ImageTensor crop(const ImageTensor& img, int y0, int x0, int out_h, int out_w) {
  validate_image(img);
  if (y0 < 0 || x0 < 0 || out_h < 1 || out_w < 1 || y0 + out_h > img.height ||
      x0 + out_w > img.width) {
    fail(ErrorKind::InvalidInput, "crop exceeds image bounds");
  }
  ImageTensor out = make_image(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const auto* src = &img.data[(static_cast<std::size_t>(y0 + y) * img.width + x0) *
                                ImageTensor::channels];
    auto* dst = &out.data[static_cast<std::size_t>(y) * out_w * ImageTensor::channels];
    std::copy(src, src + static_cast<std::size_t>(out_w) * ImageTensor::channels, dst);
  }
  return out;
}

ImageTensor rotate_cropped(const ImageTensor& img, double radians) {
  validate_image(img);
  auto [wr, hr] = max_interior_rect(img.width, img.height, radians);
  const int out_w = std::max(1, static_cast<int>(std::floor(wr)));
  const int out_h = std::max(1, static_cast<int>(std::floor(hr)));

  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;
  const double ocx = (out_w - 1) / 2.0;
  const double ocy = (out_h - 1) / 2.0;
  const double cos_a = std::cos(radians);
  const double sin_a = std::sin(radians);

  ImageTensor out = make_image(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const double dy = y - ocy;
    for (int x = 0; x < out_w; ++x) {
      const double dx = x - ocx;
      // inverse rotation back into the source frame
      const double src_x = cx + cos_a * dx + sin_a * dy;
      const double src_y = cy - sin_a * dx + cos_a * dy;
      for (int c = 0; c < ImageTensor::channels; ++c) {
        out.at(y, x, c) = bilinear_sample(img, src_y, src_x, c);
      }
    }
  }
  return out;
}

std::vector<Variant> augment(const ImageTensor& img) {
  validate_image(img);
  if (img.height < 3 || img.width < 3) {
    fail(ErrorKind::InvalidInput, "augment requires an image of at least 3x3");
  }

  const int ch = std::max(1, (2 * img.height) / 3);
  const int cw = std::max(1, (2 * img.width) / 3);
  const int ye = img.height - ch;
  const int xe = img.width - cw;
  const double angle = std::numbers::pi / 6.0;

  std::vector<Variant> variants;
  variants.reserve(16);
  variants.push_back({"original", img});
  variants.push_back({"crop_tl", crop(img, 0, 0, ch, cw)});
  variants.push_back({"crop_tr", crop(img, 0, xe, ch, cw)});
  variants.push_back({"crop_bl", crop(img, ye, 0, ch, cw)});
  variants.push_back({"crop_br", crop(img, ye, xe, ch, cw)});
  variants.push_back({"crop_c", crop(img, ye / 2, xe / 2, ch, cw)});
  variants.push_back({"rot_ccw", rotate_cropped(img, angle)});
  variants.push_back({"rot_cw", rotate_cropped(img, -angle)});
  for (int i = 0; i < 8; ++i) {
    variants.push_back({"flip_" + variants[i].tag, hflip(variants[i].image)});
  }
  return variants;
}

std::vector<PatchRect> patch_grid(int height, int width, int window, int stride) {
  if (window < 1) fail(ErrorKind::InvalidInput, "window must be >= 1");
  if (stride < 1) fail(ErrorKind::InvalidInput, "stride must be >= 1");
  if (window > height || window > width) {
    fail(ErrorKind::InvalidInput,
         "window " + std::to_string(window) + " exceeds image " + std::to_string(height) + "x" +
             std::to_string(width));
  }
  const int ny = (height - window) / stride + 1;
  const int nx = (width - window) / stride + 1;
  std::vector<PatchRect> rects;
  rects.reserve(static_cast<std::size_t>(ny) * nx);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      rects.push_back({ix * stride, iy * stride, window});
    }
  }
  return rects;
}

std::vector<std::pair<PatchRect, ImageTensor>> extract_patches(const ImageTensor& img,
                                                               const PatchConfig& config) {
  const ImageTensor scaled = rescale_min_side(img, config.rescale);
  const auto rects = patch_grid(scaled.height, scaled.width, config.window, config.stride);
  std::vector<std::pair<PatchRect, ImageTensor>> patches;
  patches.reserve(rects.size());
  for (const auto& r : rects) {
    patches.emplace_back(r, crop(scaled, r.y0, r.x0, r.side, r.side));
  }
  return patches;
}

}  // namespace duca
