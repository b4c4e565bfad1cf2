#include "featpress/codec.hpp"

#include <zlib.h>

#include <cstring>

#include "featpress/detail/bytes.hpp"
#include "featpress/errors.hpp"

namespace featpress {

namespace detail {

std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> data,
                                      int level) {
  if (level < 1 || level > 9) {
    throw data_error("compression level " + std::to_string(level) +
                     " outside [1, 9]");
  }
  z_stream stream{};
  // windowBits -15 selects the raw RFC 1951 stream, no zlib wrapper.
  if (deflateInit2(&stream, level, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) !=
      Z_OK) {
    throw data_error("deflate init failed");
  }
  std::vector<std::uint8_t> out(deflateBound(&stream, data.size()));
  stream.next_in = const_cast<Bytef*>(data.data());
  stream.avail_in = static_cast<uInt>(data.size());
  stream.next_out = out.data();
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&stream, Z_FINISH);
  const std::size_t produced = stream.total_out;
  deflateEnd(&stream);
  if (rc != Z_STREAM_END) throw data_error("deflate failed");
  out.resize(produced);
  return out;
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> data,
                                      std::size_t expected_size) {
  z_stream stream{};
  if (inflateInit2(&stream, -15) != Z_OK) {
    throw data_error("inflate init failed");
  }
  std::vector<std::uint8_t> out(expected_size);
  stream.next_in = const_cast<Bytef*>(data.data());
  stream.avail_in = static_cast<uInt>(data.size());
  stream.next_out = out.data();
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&stream, Z_FINISH);
  const std::size_t produced = stream.total_out;
  inflateEnd(&stream);
  if (!((rc == Z_STREAM_END && produced == expected_size) ||
        (rc == Z_BUF_ERROR && expected_size == 0 && data.empty()))) {
    throw data_error("corrupt DEFLATE stream");
  }
  return out;
}

}  // namespace detail

namespace {

constexpr char kMagic[4] = {'N', 'F', 'Q', '1'};

std::size_t payload_bytes(std::uint64_t n_rows, std::size_t n_features,
                          int bits) {
  return static_cast<std::size_t>(
      (n_rows * n_features * static_cast<std::uint64_t>(bits) + 7) / 8);
}

}  // namespace

Container pack(const CodeTable& codes, const RangeModel& ranges) {
  if (codes.feature_names != ranges.feature_names) {
    throw data_error("feature schema mismatch between codes and range model");
  }
  if (codes.codes.size() != codes.n_rows() * codes.n_features()) {
    throw data_error("code table dimensions are inconsistent");
  }
  Container out;
  out.bits = codes.bits;
  out.feature_names = codes.feature_names;
  out.lo = ranges.lo;
  out.hi = ranges.hi;
  out.n_rows = codes.n_rows();
  out.payload.assign(payload_bytes(out.n_rows, out.n_features(), out.bits), 0);

  std::size_t byte_pos = 0;
  std::uint64_t acc = 0;
  int acc_bits = 0;
  for (std::uint64_t code : codes.codes) {
    acc |= code << acc_bits;
    acc_bits += codes.bits;
    while (acc_bits >= 8) {
      out.payload[byte_pos++] = static_cast<std::uint8_t>(acc & 0xff);
      acc >>= 8;
      acc_bits -= 8;
    }
  }
  if (acc_bits > 0) out.payload[byte_pos] = static_cast<std::uint8_t>(acc & 0xff);
  return out;
}

std::pair<CodeTable, RangeModel> unpack(const Container& container) {
  if (container.lo.size() != container.n_features() ||
      container.hi.size() != container.n_features()) {
    throw data_error("container range arrays are inconsistent");
  }
  const std::size_t expected =
      payload_bytes(container.n_rows, container.n_features(), container.bits);
  if (container.payload.size() != expected) {
    throw data_error("payload length " +
                     std::to_string(container.payload.size()) +
                     " does not match expected " + std::to_string(expected));
  }

  CodeTable codes;
  codes.feature_names = container.feature_names;
  codes.bits = container.bits;
  codes.row_count = container.n_rows;
  codes.codes.resize(container.n_rows * container.n_features());

  const std::uint64_t mask = container.bits == 64
                                 ? ~0ULL
                                 : ((1ULL << container.bits) - 1);
  std::size_t byte_pos = 0;
  std::uint64_t acc = 0;
  int acc_bits = 0;
  for (std::uint64_t& code : codes.codes) {
    while (acc_bits < container.bits) {
      acc |= static_cast<std::uint64_t>(container.payload[byte_pos++])
             << acc_bits;
      acc_bits += 8;
    }
    code = acc & mask;
    acc >>= container.bits;
    acc_bits -= container.bits;
  }

  RangeModel ranges;
  ranges.feature_names = container.feature_names;
  ranges.lo = container.lo;
  ranges.hi = container.hi;
  return {std::move(codes), std::move(ranges)};
}

std::vector<std::uint8_t> seal(const Container& container, int level) {
  if (container.bits < 1 || container.bits > 32) {
    throw data_error("container bit width outside [1, 32]");
  }
  std::vector<std::uint8_t> out;
  detail::put_bytes(out, kMagic, 4);
  detail::put_u8(out, container.version);
  detail::put_u8(out, static_cast<std::uint8_t>(container.bits));
  detail::put_u32le(out, static_cast<std::uint32_t>(container.n_features()));
  detail::put_u64le(out, container.n_rows);
  for (std::size_t c = 0; c < container.n_features(); ++c) {
    const std::string& name = container.feature_names[c];
    detail::put_u16le(out, static_cast<std::uint16_t>(name.size()));
    detail::put_bytes(out, name.data(), name.size());
    detail::put_f64le(out, container.lo[c]);
    detail::put_f64le(out, container.hi[c]);
  }
  const std::vector<std::uint8_t> compressed =
      detail::deflate_raw(container.payload, level);
  detail::put_u64le(out, compressed.size());
  detail::put_bytes(out, compressed.data(), compressed.size());
  return out;
}

Container open_container(std::span<const std::uint8_t> file_bytes) {
  detail::ByteReader reader(file_bytes);
  char magic[4];
  const std::string m = reader.str(4);
  std::memcpy(magic, m.data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw data_error("bad magic: not an .nfq container");
  }
  Container out;
  out.version = reader.u8();
  if (out.version != 1) {
    throw data_error("unsupported container version " +
                     std::to_string(out.version));
  }
  out.bits = reader.u8();
  if (out.bits < 1 || out.bits > 32) {
    throw data_error("container bit width outside [1, 32]");
  }
  const std::uint32_t n_features = reader.u32le();
  out.n_rows = reader.u64le();
  for (std::uint32_t c = 0; c < n_features; ++c) {
    const std::uint16_t len = reader.u16le();
    out.feature_names.push_back(reader.str(len));
    out.lo.push_back(reader.f64le());
    out.hi.push_back(reader.f64le());
  }
  const std::uint64_t compressed_len = reader.u64le();
  if (reader.remaining() < compressed_len) {
    throw data_error("truncated payload: expected " +
                     std::to_string(compressed_len) + " compressed bytes, have " +
                     std::to_string(reader.remaining()));
  }
  const std::size_t expected =
      payload_bytes(out.n_rows, out.n_features(), out.bits);
  out.payload = detail::inflate_raw(
      reader.rest().subspan(0, compressed_len), expected);
  return out;
}

BaselineSizes baseline_sizes(const FeatureTable& table, int level) {
  const std::string csv = canonical_csv(table);
  std::vector<std::uint8_t> f32;
  f32.reserve(table.n_rows() * table.n_features() * 4);
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.n_features(); ++c) {
      const auto v = static_cast<float>(table.at(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      detail::put_u32le(f32, bits);
    }
  }
  BaselineSizes out;
  out.csv_bytes =
      detail::deflate_raw(
          std::span(reinterpret_cast<const std::uint8_t*>(csv.data()),
                    csv.size()),
          level)
          .size();
  out.f32_bytes = detail::deflate_raw(f32, level).size();
  return out;
}

double reduction_factor(double baseline_bytes, double lossy_bytes) {
  if (!(baseline_bytes > 0.0) || !(lossy_bytes > 0.0)) {
    throw data_error("reduction factor requires positive sizes");
  }
  return baseline_bytes / lossy_bytes;
}

double storage_rate(double bytes, double duration_seconds) {
  if (!(duration_seconds > 0.0)) {
    throw data_error("storage rate requires a positive duration");
  }
  return 8.0 * bytes / duration_seconds;
}

}  // namespace featpress
