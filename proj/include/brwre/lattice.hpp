#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace brwre {

inline constexpr int kMaxDim = 6;

/// A point of Z^d (d <= kMaxDim); unused trailing coordinates stay zero.
struct Site {
  std::array<int, kMaxDim> x{};

  int& operator[](int k) { return x[static_cast<std::size_t>(k)]; }
  int operator[](int k) const { return x[static_cast<std::size_t>(k)]; }
  friend bool operator==(const Site&, const Site&) = default;
};

/// sup-norm distance.
inline int sup_distance(const Site& a, const Site& b, int dim) {
  int m = 0;
  for (int k = 0; k < dim; ++k) {
    const int diff = a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
    if (diff > m) m = diff;
  }
  return m;
}

/// The cube Lambda(center, radius) = {y : |y - center|_inf <= radius}, with
/// row-major linear indexing (last coordinate fastest).
class Box {
 public:
  Box() = default;
  Box(int dim, Site center, int radius) : dim_(dim), center_(center), radius_(radius) {
    if (dim < 1 || dim > kMaxDim)
      throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (radius < 0) throw std::invalid_argument("box radius must be >= 0");
    side_ = 2 * radius + 1;
    size_ = 1;
    for (int k = 0; k < dim; ++k) size_ *= static_cast<std::size_t>(side_);
  }
  static Box centered(int dim, int radius) { return Box(dim, Site{}, radius); }

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int side() const { return side_; }
  const Site& center() const { return center_; }
  std::size_t size() const { return size_; }

  bool contains(const Site& s) const { return sup_distance(s, center_, dim_) <= radius_; }
  bool contains(const Box& inner) const {
    return inner.dim_ == dim_ && sup_distance(inner.center_, center_, dim_) + inner.radius_ <= radius_;
  }

  std::size_t index(const Site& s) const {
    std::size_t idx = 0;
    for (int k = 0; k < dim_; ++k)
      idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(s[k] - center_[k] + radius_);
    return idx;
  }

  Site site(std::size_t idx) const {
    Site s;
    for (int k = dim_ - 1; k >= 0; --k) {
      s[k] = static_cast<int>(idx % static_cast<std::size_t>(side_)) - radius_ + center_[k];
      idx /= static_cast<std::size_t>(side_);
    }
    return s;
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  int dim_ = 1;
  Site center_{};
  int radius_ = 0;
  int side_ = 1;
  std::size_t size_ = 1;
};

}  // namespace brwre
