// Copyright 2005 Google Inc. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS-IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Self-contained port of the S2 cell id encoding (cube-face projection plus
// Hilbert curve ordering, quadratic ST transform). Produces ids bit-identical
// to the reference library; verified against an oracle fixture.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "geosid/types.hpp"

namespace geosid {

class CellId {
public:
    static constexpr int kFaceBits = 3;
    static constexpr int kNumFaces = 6;
    static constexpr int kMaxLevel = 30;
    static constexpr int kPosBits = 2 * kMaxLevel + 1;
    static constexpr int kMaxSize = 1 << kMaxLevel;

    CellId() = default;
    explicit CellId(std::uint64_t id) : id_(id) {}

    // Cell containing p at the given level. Throws ValidationError on
    // out-of-bounds coordinates or level outside [0, 30].
    static CellId from_point(const GeoPoint& p, int level = kMaxLevel);

    std::uint64_t id() const { return id_; }
    int face() const { return static_cast<int>(id_ >> kPosBits); }
    int level() const;
    bool is_valid() const;

    // Ancestor cell at the requested level; its face+position bits are a
    // bit-prefix of this cell's. Throws if level > this->level().
    CellId ancestor(int level) const;

    bool contains(const CellId& other) const;

    // Center of the cell as a lat/lng point.
    GeoPoint to_point() const;

    // 16 lowercase hex digits, zero-padded big-endian.
    std::string to_hex() const;
    static CellId from_hex(std::string_view hex);

    bool operator==(const CellId& o) const { return id_ == o.id_; }

private:
    std::uint64_t lsb() const { return id_ & (~id_ + 1); }

    std::uint64_t id_ = 0;
};

}  // namespace geosid
