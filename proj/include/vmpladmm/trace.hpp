#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>

namespace vmpladmm {

enum class CertStatus { Pass, Fail, Skip };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Pass: return "pass";
    case CertStatus::Fail: return "fail";
    case CertStatus::Skip: return "skip";
  }
  return "unknown";
}

/// One checked inequality. slack = (allowed side) - (observed side); the check
/// passes when slack >= -tolerance.
template <typename Scalar = double>
struct Certificate {
  CertStatus status = CertStatus::Skip;
  Scalar slack{0};
  Scalar tolerance{0};
};

/// Names of the per-iteration certificates, in trace column order.
namespace cert {
inline constexpr std::string_view kZUpdateIdentity = "z_update_identity";
inline constexpr std::string_view kYOptimality = "y_optimality";
inline constexpr std::string_view kXSurrogateDecrease = "x_surrogate_decrease";
inline constexpr std::string_view kDescentX = "descent_x";
inline constexpr std::string_view kDescentY = "descent_y";
inline constexpr std::string_view kLagrangianMonotone = "lagrangian_monotone";
inline constexpr std::string_view kDualStepBound = "dual_step_bound";
inline constexpr std::string_view kRegLagrangianDecrease = "reg_lagrangian_decrease";
inline constexpr std::string_view kSubgradientBound = "subgradient_bound";
inline constexpr std::string_view kRegSubgradientBound = "reg_subgradient_bound";

inline constexpr std::array<std::string_view, 10> kAll = {
    kZUpdateIdentity,   kYOptimality,          kXSurrogateDecrease,
    kDescentX,          kDescentY,             kLagrangianMonotone,
    kDualStepBound,     kRegLagrangianDecrease, kSubgradientBound,
    kRegSubgradientBound};
}  // namespace cert

/// Diagnostics row for iterate k (produced by the step from k-1 to k).
template <typename Scalar = double>
struct TraceRecord {
  long k = 0;
  Scalar lagrangian{0};
  Scalar reg_lagrangian{0};
  Scalar delta_x{0};
  Scalar delta_y{0};
  Scalar delta_z{0};
  Scalar residual_norm{0};
  Scalar d_norm{0};
  Scalar d_bound{0};
  Scalar s_norm{0};
  Scalar s_bound{0};
  Scalar objective{0};
  /// Largest diagonal entries of the metrics used by the producing step.
  Scalar q1_scale{0};
  Scalar q2_scale{0};
  std::map<std::string, Certificate<Scalar>, std::less<>> certificates;

  Scalar delta_sum() const { return delta_x + delta_y + delta_z; }

  bool passed(std::string_view name) const {
    auto it = certificates.find(name);
    return it != certificates.end() && it->second.status == CertStatus::Pass;
  }

  int violations() const {
    int n = 0;
    for (const auto& [name, c] : certificates) n += c.status == CertStatus::Fail;
    return n;
  }
};

}  // namespace vmpladmm
