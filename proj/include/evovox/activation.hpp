#pragma once

#include <span>
#include <string_view>

namespace evovox {

// Activation set available to evolved CPPNs plus the fixed substrate ReLU.
enum class ActivationFunction {
  kSine,
  kNegSine,
  kAbs,
  kNegAbs,
  kSquare,
  kNegSquare,
  kSqrtAbs,
  kNegSqrtAbs,
  kSigmoid,
  kRelu,
};

// Pre-activation sums are clamped to this magnitude so every function is
// total on finite inputs (square would overflow otherwise once CPPNs stack).
inline constexpr double kPreActivationClamp = 1e6;

double apply_activation(ActivationFunction f, double v);

std::string_view activation_name(ActivationFunction f);
ActivationFunction activation_from_name(std::string_view name);

// The nine functions evolved CPPN nodes may carry. ReLU is reserved for the
// substrate and is not part of the mutation draw.
std::span<const ActivationFunction> cppn_activation_set();

}  // namespace evovox
