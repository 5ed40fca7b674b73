#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace xct {

// Dense row-major 2D array. data()[y*width + x].
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int height, int width, T fill = T{})
      : h_(height), w_(width), v_(static_cast<std::size_t>(height) * width, fill) {
    assert(height >= 0 && width >= 0);
  }

  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  T& operator()(int y, int x) { return v_[static_cast<std::size_t>(y) * w_ + x]; }
  const T& operator()(int y, int x) const { return v_[static_cast<std::size_t>(y) * w_ + x]; }

  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  T* row(int y) { return v_.data() + static_cast<std::size_t>(y) * w_; }
  const T* row(int y) const { return v_.data() + static_cast<std::size_t>(y) * w_; }

  std::vector<T>& vec() { return v_; }
  const std::vector<T>& vec() const { return v_; }

  void fill(T value) { v_.assign(v_.size(), value); }

  bool same_shape(const Image& other) const { return h_ == other.h_ && w_ == other.w_; }

  template <typename U>
  Image<U> cast() const {
    Image<U> out(h_, w_);
    for (std::size_t i = 0; i < v_.size(); ++i) out.data()[i] = static_cast<U>(v_[i]);
    return out;
  }

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<T> v_;
};

inline bool is_pow2(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace xct
