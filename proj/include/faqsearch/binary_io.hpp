#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace faqsearch::binary {

// Little-endian fixed-width encoding used by the index and model files.

void write_magic(std::ostream& out, std::string_view magic, std::uint32_t version);
/// Throws FormatError on a magic mismatch or an unsupported version.
std::uint32_t read_magic(std::istream& in, std::string_view magic, std::uint32_t max_version);

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, std::string_view s);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);

}  // namespace faqsearch::binary
