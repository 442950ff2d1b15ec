#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace bnsens {

/// A real number in [0, 1]. Construction rejects anything else, including NaN.
class Probability {
 public:
  constexpr Probability() noexcept = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr double complement() const noexcept { return 1.0 - value_; }

  friend constexpr auto operator<=>(Probability, Probability) noexcept = default;

 private:
  double value_ = 0.0;
};

/// Base-10 log-odds, log10(p / (1 - p)).
struct LogOdds {
  double value = 0.0;
  friend constexpr auto operator<=>(LogOdds, LogOdds) noexcept = default;
};

/// Base-10 log-likelihood ratio contributed by one finding state.
struct EvidenceWeight {
  double value = 0.0;
  friend constexpr auto operator<=>(EvidenceWeight, EvidenceWeight) noexcept = default;
};

enum class ParameterClass { Link, Leak, Prior };

std::string_view to_string(ParameterClass c) noexcept;
std::optional<ParameterClass> parse_parameter_class(std::string_view text) noexcept;

}  // namespace bnsens
