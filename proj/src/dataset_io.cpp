// Copyright 2026 The agbench Authors. All Rights Reserved.
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

#include "agbench/dataset_io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "agbench/error.hpp"

namespace agbench {

namespace fs = std::filesystem;

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_text_file(const fs::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

std::string read_text_file(const fs::path& path) {
  auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

// ---------------------------------------------------------------------------
// IDX

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void append_be32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

struct IdxHeader {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::size_t payload_offset = 0;
};

IdxHeader read_idx_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw LengthError("IDX: file shorter than magic number");
  IdxHeader h;
  h.magic = read_be32(bytes, 0);
  if (h.magic != kIdxImagesMagic && h.magic != kIdxLabelsMagic) {
    std::ostringstream msg;
    msg << "IDX: unsupported magic 0x" << std::hex << h.magic;
    throw FormatError(msg.str());
  }
  const std::size_t ndim = h.magic & 0xff;
  h.payload_offset = 4 + 4 * ndim;
  if (bytes.size() < h.payload_offset) throw LengthError("IDX: truncated header");
  for (std::size_t i = 0; i < ndim; ++i) h.dims.push_back(read_be32(bytes, 4 + 4 * i));

  std::uint64_t expected = 1;
  for (auto d : h.dims) expected *= d;
  const std::uint64_t actual = bytes.size() - h.payload_offset;
  if (actual != expected) {
    throw LengthError("IDX: payload has " + std::to_string(actual) + " bytes, header declares " +
                      std::to_string(expected));
  }
  return h;
}

}  // namespace

IdxContent parse_idx(std::span<const std::uint8_t> bytes) {
  const auto h = read_idx_header(bytes);
  const auto payload = bytes.subspan(h.payload_offset);
  if (h.magic == kIdxLabelsMagic) {
    return std::vector<std::uint32_t>(payload.begin(), payload.end());
  }
  const std::size_t count = h.dims[0], rows = h.dims[1], cols = h.dims[2];
  const std::size_t stride = rows * cols;
  std::vector<GrayImage> images;
  images.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    images.push_back(GrayImage::from_bytes(cols, rows, payload.subspan(i * stride, stride)));
  }
  return images;
}

std::vector<GrayImage> parse_idx_images(std::span<const std::uint8_t> bytes) {
  auto content = parse_idx(bytes);
  if (auto* images = std::get_if<std::vector<GrayImage>>(&content)) return std::move(*images);
  throw FormatError("IDX: expected an image file (magic 0x00000803)");
}

std::vector<std::uint32_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  auto content = parse_idx(bytes);
  if (auto* labels = std::get_if<std::vector<std::uint32_t>>(&content)) return std::move(*labels);
  throw FormatError("IDX: expected a label file (magic 0x00000801)");
}

Bytes write_idx_images(std::span<const GrayImage> images) {
  Bytes out;
  append_be32(out, kIdxImagesMagic);
  append_be32(out, static_cast<std::uint32_t>(images.size()));
  const std::size_t rows = images.empty() ? 0 : images.front().height();
  const std::size_t cols = images.empty() ? 0 : images.front().width();
  append_be32(out, static_cast<std::uint32_t>(rows));
  append_be32(out, static_cast<std::uint32_t>(cols));
  out.reserve(out.size() + images.size() * rows * cols);
  for (const auto& img : images) {
    if (img.width() != cols || img.height() != rows) {
      throw ShapeError("IDX: all images must share one size");
    }
    const auto px = img.to_bytes();
    out.insert(out.end(), px.begin(), px.end());
  }
  return out;
}

Bytes write_idx_labels(std::span<const std::uint32_t> labels) {
  Bytes out;
  append_be32(out, kIdxLabelsMagic);
  append_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (auto l : labels) {
    if (l > 255) throw ParameterError("IDX: label " + std::to_string(l) + " does not fit a byte");
    out.push_back(static_cast<std::uint8_t>(l));
  }
  return out;
}

IdxPair write_idx(const LabeledDataset& dataset) {
  std::vector<GrayImage> images;
  std::vector<std::uint32_t> labels;
  images.reserve(dataset.size());
  for (const auto& item : dataset.items) {
    images.push_back(item.image);
    labels.push_back(item.label);
  }
  return {write_idx_images(images), write_idx_labels(labels)};
}

LabeledDataset parse_idx_dataset(std::span<const std::uint8_t> images,
                                 std::span<const std::uint8_t> labels, std::string source) {
  auto imgs = parse_idx_images(images);
  auto lbls = parse_idx_labels(labels);
  if (imgs.size() != lbls.size()) {
    throw FormatError("IDX: " + std::to_string(imgs.size()) + " images but " +
                      std::to_string(lbls.size()) + " labels");
  }
  LabeledDataset ds;
  ds.class_names = digit_class_names();
  ds.source = std::move(source);
  ds.items.reserve(imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    ds.items.push_back({std::move(imgs[i]), lbls[i]});
  }
  ds.validate();
  return ds;
}

LabeledDataset load_mnist(const fs::path& dir, std::string_view split) {
  const std::string prefix(split);
  const auto images = read_file(dir / (prefix + "-images-idx3-ubyte"));
  const auto labels = read_file(dir / (prefix + "-labels-idx1-ubyte"));
  return parse_idx_dataset(images, labels, "mnist:" + prefix + ":" + dir.string());
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

}  // namespace

GrayImage load_png_gray(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError(std::string("PNG: ") + image.message);
  }
  // Read as RGB and average ourselves; libpng's own gray conversion is
  // luma-weighted. Alpha is composited onto white, the silhouette ground.
  image.format = PNG_FORMAT_RGB;
  const std::size_t w = image.width, h = image.height;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&image, &white, rgb.data(), 0, nullptr)) {
    throw FormatError(std::string("PNG: ") + image.message);
  }
  std::vector<float> data(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    const unsigned sum = rgb[3 * i] + rgb[3 * i + 1] + rgb[3 * i + 2];
    data[i] = static_cast<float>(sum) / (3.0f * 255.0f);
  }
  return GrayImage(w, h, std::move(data));
}

Bytes write_png_gray(const GrayImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  PngImageGuard guard{&image};
  const auto px = img.to_bytes();

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode: ") + image.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

GrayImage load_png_file(const fs::path& path) {
  try {
    return load_png_gray(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_png_file(const fs::path& path, const GrayImage& image) {
  write_file(path, write_png_gray(image));
}

LabeledDataset load_png_directory(const fs::path& dir,
                                  const std::vector<std::string>& class_names) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  LabeledDataset ds;
  ds.class_names = class_names;
  ds.source = "png-dir:" + dir.string();
  for (std::size_t label = 0; label < class_names.size(); ++label) {
    const auto sub = dir / class_names[label];
    if (!fs::is_directory(sub)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(sub)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      ds.items.push_back({load_png_file(f), static_cast<std::uint32_t>(label)});
    }
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Class map

const std::array<std::string, kCoarseClasses>& coarse_category_names() {
  static const std::array<std::string, kCoarseClasses> names = {
      "airplane", "bear", "bicycle",  "bird",     "boat",  "bottle", "car",   "cat",
      "chair",    "clock", "dog",     "elephant", "keyboard", "knife", "oven", "truck"};
  return names;
}

std::vector<std::string> coarse_category_list() {
  const auto& names = coarse_category_names();
  return {names.begin(), names.end()};
}

std::size_t ClassMap::mapped_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.has_value(); }));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

ClassMap load_class_map(std::string_view text) {
  ClassMap map;
  const auto& names = map.category_names;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!seen_header) {
      seen_header = true;
      if (line.rfind("fine_index", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("class map line " + std::to_string(line_no) + ": expected 2 columns");
    }
    const auto idx_field = trim(line.substr(0, comma));
    const auto cat_field = trim(line.substr(comma + 1));
    std::size_t fine = 0;
    const auto [ptr, ec] =
        std::from_chars(idx_field.data(), idx_field.data() + idx_field.size(), fine);
    if (ec != std::errc{} || ptr != idx_field.data() + idx_field.size()) {
      throw FormatError("class map line " + std::to_string(line_no) + ": bad fine index '" +
                        std::string(idx_field) + "'");
    }
    if (fine >= kFineClasses) {
      throw FormatError("class map line " + std::to_string(line_no) + ": fine index " +
                        std::to_string(fine) + " >= 1000");
    }
    const auto it = std::find(names.begin(), names.end(), cat_field);
    if (it == names.end()) {
      throw FormatError("class map line " + std::to_string(line_no) + ": unknown category '" +
                        std::string(cat_field) + "'");
    }
    if (map.entries[fine]) {
      throw FormatError("class map line " + std::to_string(line_no) + ": duplicate fine index " +
                        std::to_string(fine));
    }
    map.entries[fine] = static_cast<std::uint8_t>(it - names.begin());
  }
  return map;
}

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr)) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string content_hash(const GrayImage& image) {
  Bytes buf;
  buf.reserve(8 + image.size());
  append_be32(buf, static_cast<std::uint32_t>(image.width()));
  append_be32(buf, static_cast<std::uint32_t>(image.height()));
  const auto px = image.to_bytes();
  buf.insert(buf.end(), px.begin(), px.end());
  return sha256_hex(buf);
}

}  // namespace agbench
