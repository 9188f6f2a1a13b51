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

#include "geosid/s2cell.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>

namespace geosid {

namespace {

constexpr int kSwapMask = 0x01;
constexpr int kInvertMask = 0x02;
constexpr int kLookupBits = 4;

// Hilbert curve traversal order and orientation adjustments per subcell.
constexpr int kPosToIJ[4][4] = {
    {0, 1, 3, 2},
    {0, 2, 3, 1},
    {3, 2, 0, 1},
    {3, 1, 0, 2},
};
constexpr int kPosToOrientation[4] = {kSwapMask, 0, 0, kInvertMask | kSwapMask};

std::uint16_t lookup_pos[1 << (2 * kLookupBits + 2)];
std::uint16_t lookup_ij[1 << (2 * kLookupBits + 2)];

void init_lookup_cell(int level, int i, int j, int orig_orientation, int pos,
                      int orientation) {
    if (level == kLookupBits) {
        int ij = (i << kLookupBits) + j;
        lookup_pos[(ij << 2) + orig_orientation] =
            static_cast<std::uint16_t>((pos << 2) + orientation);
        lookup_ij[(pos << 2) + orig_orientation] =
            static_cast<std::uint16_t>((ij << 2) + orientation);
    } else {
        level++;
        i <<= 1;
        j <<= 1;
        pos <<= 2;
        const int* r = kPosToIJ[orientation];
        for (int k = 0; k < 4; ++k) {
            init_lookup_cell(level, i + (r[k] >> 1), j + (r[k] & 1),
                             orig_orientation, pos + k,
                             orientation ^ kPosToOrientation[k]);
        }
    }
}

std::once_flag lookup_once;

void maybe_init() {
    std::call_once(lookup_once, [] {
        init_lookup_cell(0, 0, 0, 0, 0, 0);
        init_lookup_cell(0, 0, 0, kSwapMask, 0, kSwapMask);
        init_lookup_cell(0, 0, 0, kInvertMask, 0, kInvertMask);
        init_lookup_cell(0, 0, 0, kSwapMask | kInvertMask, 0,
                         kSwapMask | kInvertMask);
    });
}

struct Xyz {
    double x, y, z;
};

Xyz latlng_to_xyz(const GeoPoint& p) {
    const double phi = p.lat * M_PI / 180.0;
    const double theta = p.lng * M_PI / 180.0;
    const double cosphi = std::cos(phi);
    return {std::cos(theta) * cosphi, std::sin(theta) * cosphi, std::sin(phi)};
}

double component(const Xyz& p, int axis) {
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
}

int largest_abs_component(const Xyz& p) {
    const double ax = std::fabs(p.x), ay = std::fabs(p.y), az = std::fabs(p.z);
    if (ax > ay) return ax > az ? 0 : 2;
    return ay > az ? 1 : 2;
}

int xyz_to_face_uv(const Xyz& p, double* u, double* v) {
    int face = largest_abs_component(p);
    if (component(p, face) < 0) face += 3;
    switch (face) {
        case 0: *u = p.y / p.x; *v = p.z / p.x; break;
        case 1: *u = -p.x / p.y; *v = p.z / p.y; break;
        case 2: *u = -p.x / p.z; *v = -p.y / p.z; break;
        case 3: *u = p.z / p.x; *v = p.y / p.x; break;
        case 4: *u = p.z / p.y; *v = -p.x / p.y; break;
        default: *u = -p.y / p.z; *v = -p.x / p.z; break;
    }
    return face;
}

Xyz face_uv_to_xyz(int face, double u, double v) {
    switch (face) {
        case 0: return {1, u, v};
        case 1: return {-u, 1, v};
        case 2: return {-u, -v, 1};
        case 3: return {-1, -v, -u};
        case 4: return {v, -1, -u};
        default: return {v, u, -1};
    }
}

// Quadratic projection: the reference library's default ST<->UV transform.
double uv_to_st(double u) {
    if (u >= 0) return 0.5 * std::sqrt(1 + 3 * u);
    return 1 - 0.5 * std::sqrt(1 - 3 * u);
}

double st_to_uv(double s) {
    if (s >= 0.5) return (1.0 / 3.0) * (4 * s * s - 1);
    return (1.0 / 3.0) * (1 - 4 * (1 - s) * (1 - s));
}

int st_to_ij(double s) {
    // rint matches the reference rounding (round-half-even).
    const double v = std::rint(static_cast<double>(CellId::kMaxSize) * s - 0.5);
    const int i = static_cast<int>(v);
    return std::max(0, std::min(CellId::kMaxSize - 1, i));
}

std::uint64_t from_face_ij(int face, int i, int j) {
    maybe_init();
    // Position bits are assembled in two 32-bit halves, then shifted one bit
    // left when combined (the trailing bit is the leaf sentinel).
    std::uint32_t n[2] = {0, static_cast<std::uint32_t>(face) << (CellId::kPosBits - 33)};
    int bits = face & kSwapMask;
    for (int k = 7; k >= 0; --k) {
        const int mask = (1 << kLookupBits) - 1;
        bits += ((i >> (k * kLookupBits)) & mask) << (kLookupBits + 2);
        bits += ((j >> (k * kLookupBits)) & mask) << 2;
        bits = lookup_pos[bits];
        n[k >> 2] |= static_cast<std::uint32_t>(bits >> 2)
                     << ((k & 3) * 2 * kLookupBits);
        bits &= (kSwapMask | kInvertMask);
    }
    return ((static_cast<std::uint64_t>(n[1]) << 32) + n[0]) * 2 + 1;
}

// Inverse of from_face_ij, ignoring orientation (only the center is needed).
void to_face_ij(std::uint64_t id, int* face, int* i, int* j) {
    maybe_init();
    *face = static_cast<int>(id >> CellId::kPosBits);
    int bits = *face & kSwapMask;
    int pi = 0, pj = 0;
    for (int k = 7; k >= 0; --k) {
        const int nbits = (k == 7) ? (CellId::kMaxLevel - 7 * kLookupBits)
                                   : kLookupBits;
        bits += static_cast<int>(id >> (k * 2 * kLookupBits + 1) &
                                 ((1 << (2 * nbits)) - 1))
                << 2;
        bits = lookup_ij[bits];
        pi += (bits >> (kLookupBits + 2)) << (k * kLookupBits);
        pj += ((bits >> 2) & ((1 << kLookupBits) - 1)) << (k * kLookupBits);
        bits &= (kSwapMask | kInvertMask);
    }
    *i = pi;
    *j = pj;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

CellId CellId::from_point(const GeoPoint& p, int level) {
    if (!point_in_bounds(p)) {
        throw ValidationError("point out of bounds: lat=" + std::to_string(p.lat) +
                              " lng=" + std::to_string(p.lng));
    }
    if (level < 0 || level > kMaxLevel) {
        throw ValidationError("cell level out of range: " + std::to_string(level));
    }
    double u = 0, v = 0;
    const int face = xyz_to_face_uv(latlng_to_xyz(p), &u, &v);
    const int i = st_to_ij(uv_to_st(u));
    const int j = st_to_ij(uv_to_st(v));
    return CellId(from_face_ij(face, i, j)).ancestor(level);
}

int CellId::level() const {
    if (id_ == 0) throw ValidationError("level() on null cell id");
    return kMaxLevel - (std::countr_zero(id_) >> 1);
}

bool CellId::is_valid() const {
    if (face() >= kNumFaces) return false;
    // Exactly one sentinel bit at an even position below the face bits.
    const std::uint64_t l = lsb();
    return l != 0 && (l & 0x1555555555555555ULL) != 0;
}

CellId CellId::ancestor(int level) const {
    if (level < 0 || level > this->level()) {
        throw ValidationError("ancestor level " + std::to_string(level) +
                              " above cell level " + std::to_string(this->level()));
    }
    const std::uint64_t new_lsb = std::uint64_t{1} << (2 * (kMaxLevel - level));
    return CellId((id_ & (~new_lsb + 1)) | new_lsb);
}

bool CellId::contains(const CellId& other) const {
    const std::uint64_t span = lsb() - 1;
    return other.id_ >= id_ - span && other.id_ <= id_ + span;
}

GeoPoint CellId::to_point() const {
    int face = 0, i = 0, j = 0;
    to_face_ij(id_, &face, &i, &j);
    // Decoding the sentinel bit through the Hilbert tables lands on a leaf
    // next to the cell center; delta nudges onto the center in si/ti units.
    const bool leaf = (id_ & 1) != 0;
    const int delta =
        leaf ? 1 : (((i ^ (static_cast<int>(id_) >> 2)) & 1) ? 2 : 0);
    const double si = 2.0 * i + delta;
    const double ti = 2.0 * j + delta;
    const double u = st_to_uv(si / (2.0 * kMaxSize));
    const double v = st_to_uv(ti / (2.0 * kMaxSize));
    const Xyz p = face_uv_to_xyz(face, u, v);
    const double lat = std::atan2(p.z, std::sqrt(p.x * p.x + p.y * p.y));
    const double lng = std::atan2(p.y, p.x);
    return {lat * 180.0 / M_PI, lng * 180.0 / M_PI};
}

std::string CellId::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t x = id_;
    for (int k = 15; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = digits[x & 0xf];
        x >>= 4;
    }
    return out;
}

CellId CellId::from_hex(std::string_view hex) {
    if (hex.size() != 16) {
        throw ValidationError("cell hex must be 16 digits, got '" +
                              std::string(hex) + "'");
    }
    std::uint64_t id = 0;
    for (char c : hex) {
        const int d = hex_digit(c);
        if (d < 0) {
            throw ValidationError("invalid hex digit in cell id: '" +
                                  std::string(hex) + "'");
        }
        id = (id << 4) | static_cast<std::uint64_t>(d);
    }
    return CellId(id);
}

}  // namespace geosid
