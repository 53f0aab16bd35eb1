#include "tsl/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tsl/error.hpp"

namespace tsl {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'E', 'N'};
constexpr unsigned char kVersion = 1;

template <typename T>
void put_le(std::string &out, T v)
{
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits >>= 8;
  }
}

template <typename T>
T get_le(std::string const &in, std::size_t &pos)
{
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (pos + sizeof(T) > in.size()) {
    throw FormatError("CTEN payload truncated");
  }
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

} // namespace

std::string encode_cten(DenseTensor const &tensor, CtenPrecision precision)
{
  if (tensor.order() == 0 || tensor.order() > 255) {
    throw FormatError("CTEN supports 1 to 255 dimensions");
  }
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(precision));
  out.push_back(static_cast<char>(tensor.order()));
  for (auto d : tensor.dims()) {
    if (d > 0xFFFFFFFFu) {
      throw FormatError("extent does not fit in 32 bits");
    }
    put_le(out, static_cast<std::uint32_t>(d));
  }
  for (cd v : tensor.data()) {
    if (precision == CtenPrecision::Single) {
      put_le(out, static_cast<float>(v.real()));
      put_le(out, static_cast<float>(v.imag()));
    } else {
      put_le(out, v.real());
      put_le(out, v.imag());
    }
  }
  return out;
}

DenseTensor decode_cten(std::string const &bytes)
{
  if (bytes.size() < 7 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a CTEN file (bad magic)");
  }
  if (static_cast<unsigned char>(bytes[4]) != kVersion) {
    throw FormatError("unsupported CTEN version");
  }
  auto const dtype = static_cast<unsigned char>(bytes[5]);
  if (dtype > 1) {
    throw FormatError("unknown CTEN dtype");
  }
  auto const ndim = static_cast<unsigned char>(bytes[6]);
  std::size_t pos = 7;
  std::vector<std::size_t> dims;
  std::size_t count = 1;
  for (unsigned i = 0; i < ndim; ++i) {
    dims.push_back(get_le<std::uint32_t>(bytes, pos));
    count *= dims.back();
  }
  std::size_t const elem = dtype == 0 ? 8 : 16;
  if (bytes.size() - pos != elem * count) {
    throw FormatError("CTEN payload length does not match extents");
  }
  std::vector<cd> data(count);
  for (auto &v : data) {
    if (dtype == 0) {
      float const re = get_le<float>(bytes, pos);
      float const im = get_le<float>(bytes, pos);
      v = {re, im};
    } else {
      double const re = get_le<double>(bytes, pos);
      double const im = get_le<double>(bytes, pos);
      v = {re, im};
    }
  }
  return DenseTensor(std::move(dims), std::move(data));
}

void write_text(std::filesystem::path const &path, std::string const &text)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) {
    throw IoError("write failed for " + path.string());
  }
}

std::string read_text(std::filesystem::path const &path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_cten(std::filesystem::path const &path, DenseTensor const &tensor, CtenPrecision precision)
{
  write_text(path, encode_cten(tensor, precision));
}

DenseTensor read_cten(std::filesystem::path const &path)
{
  try {
    return decode_cten(read_text(path));
  } catch (FormatError const &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_double(double v)
{
  char buf[64];
  auto const res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string metrics_csv(std::vector<MetricRow> const &rows)
{
  std::string s = "t,nmse,ssim,samples\n";
  for (auto const &r : rows) {
    s += std::to_string(r.t) + ',' + format_double(r.nmse) + ',' + format_double(r.ssim) + ',' +
         std::to_string(r.samples) + '\n';
  }
  return s;
}

std::string masks_csv(std::vector<MaskRow> const &rows)
{
  static char const *names[] = {"i", "j", "k", "l", "m", "n"};
  std::size_t const order = rows.empty() ? 2 : rows.front().index.size();
  std::string s = "t";
  for (std::size_t m = 0; m < order; ++m) {
    s += ',';
    s += m < 6 ? names[m] : ("i" + std::to_string(m));
  }
  s += '\n';
  for (auto const &r : rows) {
    s += std::to_string(r.t);
    for (auto i : r.index) {
      s += ',' + std::to_string(i);
    }
    s += '\n';
  }
  return s;
}

std::string trace_csv(std::vector<RunTraceRow> const &rows)
{
  std::string s = "t,f_t,step_size,gamma_norm,residual_norm\n";
  for (auto const &r : rows) {
    s += std::to_string(r.t) + ',' + format_double(r.cost) + ',' + format_double(r.step_size) + ',' +
         format_double(r.gamma_norm) + ',' + format_double(r.residual_norm) + '\n';
  }
  return s;
}

std::string budget_csv(std::vector<BudgetRow> const &rows)
{
  std::string s = "t,K,omega_size,expected\n";
  for (auto const &r : rows) {
    s += std::to_string(r.t) + ',' + std::to_string(r.k) + ',' + std::to_string(r.omega_size) + ',' +
         format_double(r.expected) + '\n';
  }
  return s;
}

} // namespace tsl
