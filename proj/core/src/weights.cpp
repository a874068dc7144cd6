#include "detbench/weights.hpp"

#include <cstring>

#include "detbench/errors.hpp"
#include "detbench/util.hpp"

namespace detbench {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<uint8_t>& out, double v) {
  const float f = static_cast<float>(v);
  uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint32_t u32() {
    require(4);
    uint32_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8) | (bytes_[pos_ + 2] << 16) |
                 (static_cast<uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }

  double f32() {
    const uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return static_cast<double>(f);
  }

  std::string str(size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void require(size_t n) {
    if (bytes_.size() - pos_ < n) throw input_error("truncated weight/tensor payload");
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

std::vector<int64_t> read_shape(Reader& r) {
  const uint32_t rank = r.u32();
  if (rank == 0 || rank > 8) throw input_error("bad tensor rank in file");
  std::vector<int64_t> shape(rank);
  for (uint32_t i = 0; i < rank; ++i) {
    shape[i] = r.u32();
    if (shape[i] < 1) throw input_error("bad tensor dimension in file");
  }
  return shape;
}

}  // namespace

const Tensor& weight_named(const WeightMap& weights, const std::string& name) {
  for (const auto& entry : weights) {
    if (entry.name == name) return entry.tensor;
  }
  throw input_error("missing weight: " + name);
}

std::vector<uint8_t> serialize_weights(const WeightMap& weights) {
  std::vector<uint8_t> out{'D', 'B', 'W', '1'};
  put_u32(out, static_cast<uint32_t>(weights.size()));
  for (const auto& entry : weights) {
    put_u32(out, static_cast<uint32_t>(entry.name.size()));
    out.insert(out.end(), entry.name.begin(), entry.name.end());
    put_u32(out, static_cast<uint32_t>(entry.tensor.rank()));
    for (int64_t d : entry.tensor.shape()) put_u32(out, static_cast<uint32_t>(d));
    for (double v : entry.tensor.data()) put_f32(out, v);
  }
  return out;
}

WeightMap deserialize_weights(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(4) != "DBW1") throw input_error("not a DBW1 weight payload");
  const uint32_t count = r.u32();
  WeightMap weights;
  weights.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    WeightEntry entry;
    entry.name = r.str(r.u32());
    Tensor t(read_shape(r));
    for (auto& v : t.data()) v = r.f32();
    entry.tensor = std::move(t);
    weights.push_back(std::move(entry));
  }
  if (!r.done()) throw input_error("trailing bytes after DBW1 payload");
  return weights;
}

void save_weights(const std::string& path, const WeightMap& weights) {
  write_binary_file(path, serialize_weights(weights));
}

WeightMap load_weights(const std::string& path) {
  const auto bytes = read_binary_file(path);
  return deserialize_weights(bytes);
}

std::vector<uint8_t> serialize_tensor(const Tensor& t) {
  std::vector<uint8_t> out{'D', 'B', 'T', '1'};
  put_u32(out, static_cast<uint32_t>(t.rank()));
  for (int64_t d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
  for (double v : t.data()) put_f32(out, v);
  return out;
}

Tensor deserialize_tensor(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(4) != "DBT1") throw input_error("not a DBT1 tensor payload");
  Tensor t(read_shape(r));
  for (auto& v : t.data()) v = r.f32();
  if (!r.done()) throw input_error("trailing bytes after DBT1 payload");
  return t;
}

void save_tensor(const std::string& path, const Tensor& t) {
  write_binary_file(path, serialize_tensor(t));
}

Tensor load_tensor(const std::string& path) {
  const auto bytes = read_binary_file(path);
  return deserialize_tensor(bytes);
}

}  // namespace detbench
