#include "detbench/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "detbench/errors.hpp"
#include "detbench/util.hpp"

namespace detbench {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_ppm_token(const std::vector<uint8_t>& bytes, size_t& pos) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    token.push_back(static_cast<char>(bytes[pos]));
    ++pos;
  }
  return token;
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

}  // namespace

Image read_ppm(const std::string& path) {
  const std::vector<uint8_t> bytes = read_binary_file(path);
  size_t pos = 0;
  if (next_ppm_token(bytes, pos) != "P6") {
    throw input_error(path + ": not a binary PPM (P6) file");
  }
  const int64_t width = parse_i64(next_ppm_token(bytes, pos));
  const int64_t height = parse_i64(next_ppm_token(bytes, pos));
  const int64_t maxval = parse_i64(next_ppm_token(bytes, pos));
  if (width < 1 || height < 1) throw input_error(path + ": bad PPM dimensions");
  if (maxval != 255) throw input_error(path + ": only maxval 255 PPM supported");
  ++pos;  // single whitespace after maxval
  const size_t need = static_cast<size_t>(width) * height * 3;
  if (bytes.size() - pos < need) throw input_error(path + ": truncated PPM payload");

  Image img(static_cast<int>(height), static_cast<int>(width));
  for (size_t i = 0; i < need; ++i) img.data()[i] = bytes[pos + i] / 255.0;
  return img;
}

void write_ppm(const std::string& path, const Image& image) {
  std::string header = "P6\n" + std::to_string(image.width()) + " " +
                       std::to_string(image.height()) + "\n255\n";
  std::vector<uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + image.data().size());
  for (double v : image.data()) {
    const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
    bytes.push_back(static_cast<uint8_t>(std::lround(scaled)));
  }
  write_binary_file(path, bytes);
}

std::vector<GroundTruth> read_labels(const std::string& path) {
  std::vector<GroundTruth> out;
  for (const auto& line : nonempty_lines(read_text_file(path))) {
    const auto f = fields_of(line);
    if (f.size() != 5) {
      throw input_error(path + ": expected 'class x_min y_min x_max y_max', got '" +
                        line + "'");
    }
    GroundTruth gt;
    gt.class_id = static_cast<int>(parse_i64(f[0]));
    gt.bbox = BBox{parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                   parse_double(f[4])};
    if (gt.class_id < 0 || !gt.bbox.valid()) {
      throw input_error(path + ": invalid label '" + line + "'");
    }
    out.push_back(gt);
  }
  return out;
}

std::string format_labels(std::span<const GroundTruth> labels) {
  std::string out;
  for (const auto& gt : labels) {
    out += std::to_string(gt.class_id) + " " + fmt_double(gt.bbox.x_min) + " " +
           fmt_double(gt.bbox.y_min) + " " + fmt_double(gt.bbox.x_max) + " " +
           fmt_double(gt.bbox.y_max) + "\n";
  }
  return out;
}

void write_labels(const std::string& path, std::span<const GroundTruth> labels) {
  write_text_file(path, format_labels(labels));
}

std::vector<Detection> read_detections(const std::string& path) {
  std::vector<Detection> out;
  for (const auto& line : nonempty_lines(read_text_file(path))) {
    const auto f = fields_of(line);
    if (f.size() != 6) {
      throw input_error(path + ": expected 'class score x_min y_min x_max y_max', got '" +
                        line + "'");
    }
    Detection det;
    det.class_id = static_cast<int>(parse_i64(f[0]));
    det.score = parse_double(f[1]);
    det.bbox = BBox{parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                    parse_double(f[5])};
    if (det.class_id < 0 || det.score < 0.0 || det.score > 1.0 || !det.bbox.valid()) {
      throw input_error(path + ": invalid detection '" + line + "'");
    }
    out.push_back(det);
  }
  return out;
}

std::string format_detections(std::span<const Detection> dets) {
  std::string out;
  for (const auto& det : dets) {
    out += std::to_string(det.class_id) + " " + fmt_double(det.score) + " " +
           fmt_double(det.bbox.x_min) + " " + fmt_double(det.bbox.y_min) + " " +
           fmt_double(det.bbox.x_max) + " " + fmt_double(det.bbox.y_max) + "\n";
  }
  return out;
}

void write_detections(const std::string& path, std::span<const Detection> dets) {
  write_text_file(path, format_detections(dets));
}

}  // namespace detbench
