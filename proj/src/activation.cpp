#include "evovox/activation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evovox {

namespace {

double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

double apply_activation(ActivationFunction f, double v) {
  v = std::clamp(v, -kPreActivationClamp, kPreActivationClamp);
  switch (f) {
    case ActivationFunction::kSine: return std::sin(v);
    case ActivationFunction::kNegSine: return -std::sin(v);
    case ActivationFunction::kAbs: return std::fabs(v);
    case ActivationFunction::kNegAbs: return -std::fabs(v);
    case ActivationFunction::kSquare: return v * v;
    case ActivationFunction::kNegSquare: return -(v * v);
    case ActivationFunction::kSqrtAbs: return std::sqrt(std::fabs(v));
    case ActivationFunction::kNegSqrtAbs: return -std::sqrt(std::fabs(v));
    case ActivationFunction::kSigmoid: return stable_sigmoid(v);
    case ActivationFunction::kRelu: return v > 0.0 ? v : 0.0;
  }
  throw std::logic_error("apply_activation: unknown function tag");
}

std::string_view activation_name(ActivationFunction f) {
  switch (f) {
    case ActivationFunction::kSine: return "sine";
    case ActivationFunction::kNegSine: return "negative_sine";
    case ActivationFunction::kAbs: return "absolute";
    case ActivationFunction::kNegAbs: return "negative_absolute";
    case ActivationFunction::kSquare: return "square";
    case ActivationFunction::kNegSquare: return "negative_square";
    case ActivationFunction::kSqrtAbs: return "sqrt_absolute";
    case ActivationFunction::kNegSqrtAbs: return "negative_sqrt_absolute";
    case ActivationFunction::kSigmoid: return "sigmoid";
    case ActivationFunction::kRelu: return "relu";
  }
  throw std::logic_error("activation_name: unknown function tag");
}

ActivationFunction activation_from_name(std::string_view name) {
  static constexpr std::array<ActivationFunction, 10> kAll = {
      ActivationFunction::kSine,       ActivationFunction::kNegSine,
      ActivationFunction::kAbs,        ActivationFunction::kNegAbs,
      ActivationFunction::kSquare,     ActivationFunction::kNegSquare,
      ActivationFunction::kSqrtAbs,    ActivationFunction::kNegSqrtAbs,
      ActivationFunction::kSigmoid,    ActivationFunction::kRelu,
  };
  for (ActivationFunction f : kAll) {
    if (activation_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown activation function: " + std::string(name));
}

std::span<const ActivationFunction> cppn_activation_set() {
  static constexpr std::array<ActivationFunction, 9> kSet = {
      ActivationFunction::kSine,    ActivationFunction::kNegSine,
      ActivationFunction::kAbs,     ActivationFunction::kNegAbs,
      ActivationFunction::kSquare,  ActivationFunction::kNegSquare,
      ActivationFunction::kSqrtAbs, ActivationFunction::kNegSqrtAbs,
      ActivationFunction::kSigmoid,
  };
  return kSet;
}

}  // namespace evovox
