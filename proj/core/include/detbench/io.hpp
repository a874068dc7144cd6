#pragma once

#include <span>
#include <string>
#include <vector>

#include "detbench/boxes.hpp"
#include "detbench/image.hpp"

namespace detbench {

// Binary PPM (P6), maxval 255. Pixel bytes map to [0,1] by /255.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& image);

// One box per line: "class x_min y_min x_max y_max".
std::vector<GroundTruth> read_labels(const std::string& path);
std::string format_labels(std::span<const GroundTruth> labels);
void write_labels(const std::string& path, std::span<const GroundTruth> labels);

// One detection per line: "class score x_min y_min x_max y_max".
std::vector<Detection> read_detections(const std::string& path);
std::string format_detections(std::span<const Detection> dets);
void write_detections(const std::string& path, std::span<const Detection> dets);

}  // namespace detbench
