#ifndef TOKBRIDGE_BINARY_IO_H_
#define TOKBRIDGE_BINARY_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace tokbridge {

// Little-endian primitive writer over an ostream. Throws IoError when the
// stream goes bad.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag);
  void u32(std::uint32_t value);
  void u64(std::uint64_t value);
  void f64(double value);
  void string(std::string_view value);  // u32 byte length + bytes
  void floats(std::span<const float> values);

 private:
  void bytes(const void* data, std::size_t size);

  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  // Throws ParseError when the next bytes are not `tag`.
  void expect_magic(std::string_view tag);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string string();
  void floats(std::span<float> values);
  // True when no bytes remain.
  bool at_end();

  const std::string& source() const { return source_; }

 private:
  void bytes(void* data, std::size_t size);

  std::istream& in_;
  std::string source_;
};

}  // namespace tokbridge

#endif  // TOKBRIDGE_BINARY_IO_H_
