#pragma once

#include <cstddef>
#include <cstdint>

namespace detbench::memtrack {

// Process-wide high-water accounting of the large buffers this library
// allocates (tensor and image payloads). Stands in for a device-side
// max-allocated counter when benchmarking in-repo adapters.

void note_alloc(size_t bytes);
void note_free(size_t bytes);

uint64_t current_bytes();
uint64_t peak_bytes();
void reset_peak();  // peak := current

// RAII charge for one buffer. Move-aware; copies charge again.
class Charge {
 public:
  Charge() = default;
  explicit Charge(size_t bytes) : bytes_(bytes) { note_alloc(bytes_); }
  Charge(const Charge& other) : bytes_(other.bytes_) { note_alloc(bytes_); }
  Charge(Charge&& other) noexcept : bytes_(other.bytes_) { other.bytes_ = 0; }
  Charge& operator=(const Charge& other) {
    if (this != &other) rebind(other.bytes_);
    return *this;
  }
  Charge& operator=(Charge&& other) noexcept {
    if (this != &other) {
      note_free(bytes_);
      bytes_ = other.bytes_;
      other.bytes_ = 0;
    }
    return *this;
  }
  ~Charge() { note_free(bytes_); }

  void rebind(size_t bytes) {
    note_free(bytes_);
    bytes_ = bytes;
    note_alloc(bytes_);
  }

 private:
  size_t bytes_ = 0;
};

}  // namespace detbench::memtrack
