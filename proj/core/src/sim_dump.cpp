// Copyright 2026 The sphericam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sphericam/sim_dump.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "binary_io.hpp"

namespace sphericam {

void write_sim_dump(const std::filesystem::path& path, const SimDump& dump) {
  detail::ByteWriter w;
  w.bytes("SIMD", 4);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(dump.frames.size()));
  w.u32(dump.bands);
  w.u32(dump.pixels);
  for (const auto& frame : dump.frames) {
    if (frame.band_count() != dump.bands)
      throw std::invalid_argument("frame " + std::to_string(frame.frame_index) + " has " +
                                  std::to_string(frame.band_count()) + " bands, dump declares " +
                                  std::to_string(dump.bands));
    for (const auto& band : frame.bands) {
      if (band.size() != static_cast<Eigen::Index>(dump.pixels))
        throw std::invalid_argument("band pixel count differs from dump header");
      for (Eigen::Index i = 0; i < band.size(); ++i) w.f32(static_cast<float>(band(i)));
    }
  }
  detail::write_file_bytes(path.string(), w.data());
}

SimDump read_sim_dump(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path.string());
  detail::ByteReader r(bytes, path.string());
  r.expect_magic("SIMD");
  if (const auto version = r.u32(); version != 1)
    throw FormatError(path.string() + ": unsupported SIM dump version " + std::to_string(version));
  const std::uint64_t n_frames = r.u32();
  SimDump dump;
  dump.bands = r.u32();
  dump.pixels = r.u32();
  const std::uint64_t expected = r.position() + 4ull * n_frames * dump.bands * dump.pixels;
  if (bytes.size() != expected)
    throw FormatError(path.string() + ": expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(bytes.size()));
  for (std::uint64_t f = 0; f < n_frames; ++f) {
    IntensityMap map;
    map.frame_index = static_cast<std::int64_t>(f);
    for (std::uint32_t b = 0; b < dump.bands; ++b) {
      Eigen::VectorXd band(dump.pixels);
      for (std::uint32_t i = 0; i < dump.pixels; ++i) band(i) = r.f32();
      map.bands.push_back(std::move(band));
    }
    dump.frames.push_back(std::move(map));
  }
  return dump;
}

GrayImage render_equirectangular(const Eigen::VectorXd& values, const Tessellation& tess,
                                 std::size_t width, const std::vector<Vec3>& markers) {
  if (values.size() != static_cast<Eigen::Index>(tess.size()))
    throw std::invalid_argument("map size does not match tessellation");
  if (width < 2 || width % 2 != 0) throw std::invalid_argument("image width must be even and >= 2");
  GrayImage img;
  img.width = width;
  img.height = width / 2;
  img.pixels.assign(img.width * img.height, 0);
  const double peak = values.maxCoeff();
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;

  const auto cell_of = [&](const Vec3& v, std::size_t& row, std::size_t& col) {
    const double az = azimuth_of(v), el = elevation_of(v);
    col = std::min(img.width - 1, static_cast<std::size_t>((az + kPi) / (2.0 * kPi) * img.width));
    row = std::min(img.height - 1, static_cast<std::size_t>((0.5 * kPi - el) / kPi * img.height));
  };

  for (std::size_t row = 0; row < img.height; ++row) {
    const double el = 0.5 * kPi - (static_cast<double>(row) + 0.5) * kPi / img.height;
    for (std::size_t col = 0; col < img.width; ++col) {
      const double az = -kPi + (static_cast<double>(col) + 0.5) * 2.0 * kPi / img.width;
      const std::size_t n = tess.nearest(unit_from_azel(az, el));
      const double v = std::clamp(values(static_cast<Eigen::Index>(n)) * scale, 0.0, 255.0);
      img.pixels[row * img.width + col] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  for (const Vec3& m : markers) {
    std::size_t r0 = 0, c0 = 0;
    cell_of(m, r0, c0);
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const auto r = static_cast<std::ptrdiff_t>(r0) + dr;
        if (r < 0 || r >= static_cast<std::ptrdiff_t>(img.height)) continue;
        const auto c = (static_cast<std::ptrdiff_t>(c0) + dc + static_cast<std::ptrdiff_t>(img.width)) %
                       static_cast<std::ptrdiff_t>(img.width);
        img.pixels[static_cast<std::size_t>(r) * img.width + static_cast<std::size_t>(c)] = 255;
      }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace sphericam
