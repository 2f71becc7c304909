#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kovi {

// Embedding of a state, an action, or a state-action pair in [0,1]^d.
struct Point {
  std::vector<double> coords;

  Point() = default;
  Point(std::initializer_list<double> c) : coords(c) {}
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  friend bool operator==(const Point&, const Point&) = default;
};

inline void check_same_dim(const Point& a, const Point& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("point dimension mismatch");
}

inline double squared_distance(const Point& a, const Point& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.coords[i] - b.coords[i];
    s += d * d;
  }
  return s;
}

inline double dot(const Point& a, const Point& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.coords[i] * b.coords[i];
  return s;
}

// (s, a) -> z embedding by coordinate concatenation.
inline Point concat(const Point& s, const Point& a) {
  Point z = s;
  z.coords.insert(z.coords.end(), a.coords.begin(), a.coords.end());
  return z;
}

}  // namespace kovi
