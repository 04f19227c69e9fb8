#include "stftlab/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace stftlab::io {
namespace {

constexpr std::array<char, 5> kMagic{'S', 'T', 'F', 'L', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFU);
  out.write(bytes.data(), 8);
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw Error("container: truncated input");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

void put_header(std::ostream& out, char tag, const std::vector<std::uint64_t>& dims,
                const std::vector<double>& extents) {
  out.write(kMagic.data(), kMagic.size());
  out.put(tag);
  put<std::uint64_t>(out, dims.size());
  for (auto d : dims) put<std::uint64_t>(out, d);
  for (auto e : extents) put<double>(out, e);
}

void put_values(std::ostream& out, const std::vector<cplx>& values) {
  for (const auto& v : values) {
    put<double>(out, v.real());
    put<double>(out, v.imag());
  }
}

std::vector<cplx> get_values(std::istream& in, std::size_t n) {
  std::vector<cplx> values(n);
  for (auto& v : values) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    v = {re, im};
  }
  return values;
}

}  // namespace

void write_container(std::ostream& out, const Container& item) {
  if (const auto* s = std::get_if<Signal>(&item)) {
    put_header(out, 'S', {s->grid.count()}, {s->grid.length()});
    put_values(out, s->values);
  } else if (const auto* f = std::get_if<TFField>(&item)) {
    put_header(out, 'F', {f->nx(), f->nw()}, {f->grid.x.length(), f->grid.omega.length()});
    put_values(out, f->values);
  } else {
    const auto& m = std::get<MaskBlob>(item);
    put_header(out, 'M', {m.grid.x.count(), m.grid.omega.count()},
               {m.grid.x.length(), m.grid.omega.length()});
    const auto runs = run_length_encode(m.inside);
    put<std::uint64_t>(out, runs.size());
    for (auto r : runs) put<std::uint64_t>(out, r);
  }
  if (!out) throw Error("container: write failed");
}

Container read_container(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("container: bad magic");
  const int tag = in.get();
  const auto rank = get<std::uint64_t>(in);
  if (rank != 1 && rank != 2) throw Error("container: unsupported rank");
  std::vector<std::uint64_t> dims(rank);
  for (auto& d : dims) d = get<std::uint64_t>(in);
  std::vector<double> extents(rank);
  for (auto& e : extents) e = get<double>(in);
  if (tag == 'S') {
    if (rank != 1) throw Error("container: signal must have rank 1");
    const auto grid = Grid1D::make(extents[0], dims[0]);
    Signal s(grid, get_values(in, dims[0]));
    require_finite(s.values, "container");
    return s;
  }
  if (rank != 2) throw Error("container: field/mask must have rank 2");
  const TFGrid grid{Grid1D::make(extents[0], dims[0]), Grid1D::make(extents[1], dims[1])};
  if (tag == 'F') {
    TFField f(grid, get_values(in, grid.size()));
    require_finite(f.values, "container");
    return f;
  }
  if (tag == 'M') {
    const auto count = get<std::uint64_t>(in);
    if (count > grid.size() + 1) throw Error("container: corrupt run table");
    std::vector<std::uint64_t> runs(count);
    for (auto& r : runs) r = get<std::uint64_t>(in);
    return MaskBlob{grid, run_length_decode(runs, grid.size())};
  }
  throw Error("container: unknown payload tag");
}

void save(const std::filesystem::path& path, const Container& item) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_container(out, item);
}

Container load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_container(in);
}

Signal load_signal(const std::filesystem::path& path) {
  auto item = load(path);
  if (auto* s = std::get_if<Signal>(&item)) return std::move(*s);
  throw Error(path.string() + " does not hold a signal");
}

TFField load_field(const std::filesystem::path& path) {
  auto item = load(path);
  if (auto* f = std::get_if<TFField>(&item)) return std::move(*f);
  throw Error(path.string() + " does not hold a TF field");
}

std::vector<std::uint64_t> run_length_encode(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint64_t> runs;
  bool current = false;
  std::uint64_t length = 0;
  for (auto b : bits) {
    const bool v = b != 0;
    if (v != current) {
      runs.push_back(length);
      current = v;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

std::vector<std::uint8_t> run_length_decode(const std::vector<std::uint64_t>& runs, std::size_t n) {
  std::vector<std::uint8_t> bits;
  bits.reserve(n);
  bool current = false;
  for (auto r : runs) {
    if (bits.size() + r > n) throw Error("container: run table overflows the grid");
    bits.insert(bits.end(), r, current ? 1 : 0);
    current = !current;
  }
  if (bits.size() != n) throw Error("container: run table does not cover the grid");
  return bits;
}

void write_signal_csv(std::ostream& out, const Signal& f) {
  out << "x,re,im\n";
  for (std::size_t k = 0; k < f.size(); ++k) {
    out << format_double(f.grid.point(k)) << ',' << format_double(f[k].real()) << ','
        << format_double(f[k].imag()) << '\n';
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace stftlab::io
