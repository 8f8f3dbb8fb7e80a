#include "steal/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>

#include "steal/errors.hpp"

namespace steal {

Tensor decode_gray(const std::filesystem::path& file, int height, int width) {
  cv::Mat img = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw DataError("unreadable image file: " + file.string());
  if (img.rows != height || img.cols != width) {
    cv::Mat resized;
    cv::resize(img, resized, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
    img = resized;
  }
  Tensor out({height, width});
  for (int r = 0; r < height; ++r) {
    const unsigned char* row = img.ptr<unsigned char>(r);
    float* dst = out.data() + static_cast<std::size_t>(r) * width;
    for (int c = 0; c < width; ++c) {
      dst[c] = static_cast<float>(row[c]) / 127.5f - 1.0f;
    }
  }
  return out;
}

void write_gray01_png(const std::filesystem::path& file, const Tensor& img) {
  if (img.rank() != 2) throw DataError("write_gray01_png expects an HxW tensor");
  const int h = img.dim(0), w = img.dim(1);
  cv::Mat m(h, w, CV_8UC1);
  for (int r = 0; r < h; ++r) {
    unsigned char* row = m.ptr<unsigned char>(r);
    const float* src = img.data() + static_cast<std::size_t>(r) * w;
    for (int c = 0; c < w; ++c) {
      const float v = std::clamp(src[c], 0.0f, 1.0f);
      row[c] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
  }
  if (!cv::imwrite(file.string(), m)) {
    throw DataError("cannot write image: " + file.string());
  }
}

void write_gray_u8_png(const std::filesystem::path& file, int height, int width,
                       const unsigned char* pixels) {
  cv::Mat m(height, width, CV_8UC1, const_cast<unsigned char*>(pixels));
  if (!cv::imwrite(file.string(), m)) {
    throw DataError("cannot write image: " + file.string());
  }
}

}  // namespace steal
