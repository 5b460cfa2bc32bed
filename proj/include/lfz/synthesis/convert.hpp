#pragma once

#include <vector>

#include "lfz/autodiff/tensor.hpp"
#include "lfz/core/light_field.hpp"

namespace lfz {

/// Stacks images into an [N,H,W,3] tensor.
template <class T>
ad::Tensor<T> images_to_tensor(const std::vector<const Image*>& imgs) {
  if (imgs.empty()) throw UsageError("images_to_tensor: no images");
  const std::size_t h = imgs[0]->height(), w = imgs[0]->width();
  ad::Tensor<T> t(ad::Shape{imgs.size(), h, w, 3});
  const std::size_t per = h * w * 3;
  for (std::size_t n = 0; n < imgs.size(); ++n) {
    if (!imgs[n]->same_shape(*imgs[0])) throw DataError("images_to_tensor: inconsistent image sizes");
    std::copy(imgs[n]->data().begin(), imgs[n]->data().end(), t.ptr() + n * per);
  }
  return t;
}

template <class T>
ad::Tensor<T> image_to_tensor(const Image& img) {
  return images_to_tensor<T>({&img});
}

/// Views of a light field as a [U*V,H,W,3] batch in row-major angular order.
template <class T>
ad::Tensor<T> light_field_to_tensor(const LightField& lf) {
  std::vector<const Image*> v;
  for (const Image& img : lf.views()) v.push_back(&img);
  return images_to_tensor<T>(v);
}

/// Sample n of an [N,H,W,3] tensor as an Image (values copied unchanged).
template <class T>
Image tensor_to_image(const ad::Tensor<T>& t, std::size_t n = 0) {
  const auto s = ad::nhwc(t);
  if (s.c != 3 || n >= s.n) throw UsageError("tensor_to_image: expected [N,H,W,3] with sample " + std::to_string(n));
  Image img(s.h, s.w);
  const std::size_t per = s.h * s.w * 3;
  for (std::size_t i = 0; i < per; ++i) img.data()[i] = static_cast<float>(t[n * per + i]);
  return img;
}

}  // namespace lfz
