#include "tokbridge/binary_io.h"

#include <bit>
#include <cstring>
#include <vector>

#include "tokbridge/error.h"

namespace tokbridge {
namespace {

constexpr std::uint32_t kMaxStringBytes = 1u << 20;

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    std::memcpy(&value, buf, sizeof(T));
  }
  return value;
}

}  // namespace

void BinaryWriter::bytes(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data),
             static_cast<std::streamsize>(size));
  if (!out_) throw IoError("write failed");
}

void BinaryWriter::magic(std::string_view tag) { bytes(tag.data(), tag.size()); }

void BinaryWriter::u32(std::uint32_t value) {
  value = to_little(value);
  bytes(&value, sizeof(value));
}

void BinaryWriter::u64(std::uint64_t value) {
  value = to_little(value);
  bytes(&value, sizeof(value));
}

void BinaryWriter::f64(double value) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  u64(bits);
}

void BinaryWriter::string(std::string_view value) {
  u32(static_cast<std::uint32_t>(value.size()));
  bytes(value.data(), value.size());
}

void BinaryWriter::floats(std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    bytes(values.data(), values.size_bytes());
  } else {
    for (float v : values) u32(std::bit_cast<std::uint32_t>(v));
  }
}

void BinaryReader::bytes(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in_.gcount()) != size) {
    throw ParseError(source_, 0, "unexpected end of file");
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string found(tag.size(), '\0');
  bytes(found.data(), found.size());
  if (found != tag) {
    throw ParseError(source_, 0, "bad magic, expected " + std::string(tag));
  }
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t value;
  bytes(&value, sizeof(value));
  return to_little(value);
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t value;
  bytes(&value, sizeof(value));
  return to_little(value);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::string() {
  const std::uint32_t size = u32();
  if (size > kMaxStringBytes) {
    throw ParseError(source_, 0, "string length " + std::to_string(size) +
                                     " exceeds limit");
  }
  std::string value(size, '\0');
  bytes(value.data(), size);
  return value;
}

void BinaryReader::floats(std::span<float> values) {
  bytes(values.data(), values.size_bytes());
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : values) v = to_little(v);
  }
}

bool BinaryReader::at_end() {
  return in_.peek() == std::istream::traits_type::eof();
}

}  // namespace tokbridge
