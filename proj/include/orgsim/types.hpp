#pragma once

#include <cmath>
#include <cstdint>

namespace orgsim {

using NodeId = std::uint32_t;
using MsgId = std::uint64_t;
using Tick = std::int64_t;

/// Planar position in meters.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace orgsim
