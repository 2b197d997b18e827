#pragma once

#include <cstdint>

namespace demosal::detail {

// Stream tags for seed derivation. Every consumer of randomness in the
// pipeline forks from the master seed through one of these, so adding or
// reordering consumers never perturbs existing streams.
inline constexpr std::uint64_t kDemoStream = 0x01;
inline constexpr std::uint64_t kMaskStream = 0x02;
inline constexpr std::uint64_t kJobStream = 0x03;
inline constexpr std::uint64_t kProbeMaskStream = 0x04;
inline constexpr std::uint64_t kProbeTrainStream = 0x05;
inline constexpr std::uint64_t kProbeEvalStream = 0x06;
inline constexpr std::uint64_t kCurveStream = 0x07;
inline constexpr std::uint64_t kTransferStream = 0x08;
inline constexpr std::uint64_t kTransferRandomStream = 0x09;

}  // namespace demosal::detail
