#pragma once

#include <cstddef>
#include <string_view>

#include "oatk/data.hpp"
#include "oatk/rng.hpp"

namespace oatk {

enum class PhantomKind { disks, points, cartoon };

/// "disks", "points" or "cartoon"; anything else is invalid_argument.
PhantomKind parse_phantom_kind(std::string_view name);
std::string_view to_string(PhantomKind kind) noexcept;

/// Non-negative test objects on `grid` (both sides >= 32 pixels).
///
///  disks:   `count` (default 3) disks, radius 5-15 % of the side, centers in
///           the middle 60 %, amplitude U[0.5, 1]; later disks overwrite
///           earlier ones, so every pixel is 0 or one disk's amplitude.
///  points:  `count` (default 1) distinct pixels of amplitude 1 in the
///           middle half of the image.
///  cartoon: background ellipse at 0.3 with `count` (default 4) disks and
///           axis-aligned rectangles at U[0.6, 1] painted over it.
Image make_phantom(PhantomKind kind, const ImageGrid& grid, Rng& rng, std::size_t count = 0);

} // namespace oatk
