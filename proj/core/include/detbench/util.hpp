#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace detbench {

// Shortest decimal representation that round-trips the exact double.
// Used everywhere a number ends up in a file so outputs are byte-stable.
std::string fmt_double(double v);

std::string fmt_i64(int64_t v);
std::string fmt_u64(uint64_t v);

double parse_double(const std::string& s);   // throws input_error
int64_t parse_i64(const std::string& s);     // throws input_error

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; callers write to disjoint slots, so results are
// identical for any worker count.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

std::string read_text_file(const std::string& path);               // throws input_error
void write_text_file(const std::string& path, const std::string& text);
std::vector<uint8_t> read_binary_file(const std::string& path);    // throws input_error
void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace detbench
