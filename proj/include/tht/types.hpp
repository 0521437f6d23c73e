#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tht {

template <typename S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = Vector<double>;
using Mat = Matrix<double>;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct DegenerateBox : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularGradient : std::domain_error {
  using std::domain_error::domain_error;
};

struct PilotDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// log(e^a + e^b) without overflow; tolerates -inf arguments.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Axis-aligned box; +-inf entries leave a coordinate unconstrained.
class Box {
 public:
  Box(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) {
      throw DegenerateBox("box bounds have mismatched dimensions");
    }
    for (Index i = 0; i < lo_.size(); ++i) {
      if (!(lo_[i] < hi_[i])) {
        throw DegenerateBox("box has lo >= hi at coordinate " +
                            std::to_string(i));
      }
    }
  }

  static Box unit_square(Index dim) {
    return Box(Vec::Zero(dim), Vec::Ones(dim));
  }

  Index dim() const { return lo_.size(); }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  bool contains(const Vec& x) const {
    return (x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all();
  }

 private:
  Vec lo_, hi_;
};

}  // namespace tht
