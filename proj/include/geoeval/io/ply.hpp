#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geoeval/error.hpp"
#include "geoeval/geometry.hpp"

namespace geoeval::io {

namespace detail {

inline std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32") {
    return 4;
  }
  if (t == "double" || t == "float64") return 8;
  throw ParseError("PLY: unknown property type '" + t + "'");
}

struct PlyProperty {
  std::string name;
  std::string type;
  std::size_t offset = 0;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
  bool has_list = false;
  std::size_t stride = 0;
};

inline double read_scalar(const char* p, const std::string& type) {
  if (type == "float" || type == "float32") {
    float f;
    std::memcpy(&f, p, 4);
    return static_cast<double>(f);
  }
  double d;
  std::memcpy(&d, p, 8);
  return d;
}

}  // namespace detail

/// Binary little-endian PLY; reads float/double x, y, z of the vertex
/// element and ignores every other property.
inline PointCloud decode_ply(std::istream& in) {
  static_assert(std::endian::native == std::endian::little);
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw ParseError("PLY: missing 'ply' magic");

  std::vector<detail::PlyElement> elements;
  bool saw_format = false;
  while (true) {
    if (!std::getline(in, line)) throw ParseError("PLY: header not terminated");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian") {
        throw ParseError("PLY: unsupported format '" + fmt + "' (binary_little_endian only)");
      }
      saw_format = true;
    } else if (kw == "element") {
      detail::PlyElement e;
      ls >> e.name >> e.count;
      if (!ls) throw ParseError("PLY: malformed element line");
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw ParseError("PLY: property before element");
      auto& e = elements.back();
      std::string type;
      ls >> type;
      if (type == "list") {
        e.has_list = true;
        continue;
      }
      detail::PlyProperty p;
      p.type = type;
      ls >> p.name;
      p.offset = e.stride;
      e.stride += detail::ply_type_size(type);
      e.properties.push_back(p);
    } else {
      throw ParseError("PLY: unexpected header keyword '" + kw + "'");
    }
  }
  if (!saw_format) throw ParseError("PLY: missing format line");

  for (const auto& e : elements) {
    if (e.name != "vertex") {
      if (e.count == 0) continue;
      if (e.has_list) throw ParseError("PLY: list element '" + e.name + "' precedes vertex data");
      in.ignore(static_cast<std::streamsize>(e.count * e.stride));
      continue;
    }
    if (e.has_list) throw ParseError("PLY: list properties on vertex are not supported");
    const detail::PlyProperty* axes[3] = {nullptr, nullptr, nullptr};
    for (const auto& p : e.properties) {
      for (int k = 0; k < 3; ++k) {
        if (p.name == std::string(1, static_cast<char>('x' + k))) axes[k] = &p;
      }
    }
    for (const auto* a : axes) {
      if (!a) throw ParseError("PLY: vertex element lacks x/y/z");
      if (a->type != "float" && a->type != "float32" && a->type != "double" && a->type != "float64") {
        throw ParseError("PLY: x/y/z must be float or double");
      }
    }
    if (e.count == 0) throw DataError("empty point set");

    std::vector<char> buf(e.count * e.stride);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw ParseError("PLY: truncated vertex data");
    PointCloud cloud;
    cloud.points.reserve(e.count);
    for (std::size_t i = 0; i < e.count; ++i) {
      const char* row = buf.data() + i * e.stride;
      cloud.points.emplace_back(detail::read_scalar(row + axes[0]->offset, axes[0]->type),
                                detail::read_scalar(row + axes[1]->offset, axes[1]->type),
                                detail::read_scalar(row + axes[2]->offset, axes[2]->type));
    }
    return cloud;
  }
  throw ParseError("PLY: no vertex element");
}

/// Writes float32 x, y, z.
inline void encode_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : cloud.points) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

inline PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return decode_ply(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  encode_ply(out, cloud);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace geoeval::io
