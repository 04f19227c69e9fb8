#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "stftlab/signal.hpp"

// Shared binary container:
//
//   bytes 0..4  magic "STFL1"
//   byte  5     payload tag: 'S' signal, 'F' TF field, 'M' RLE mask
//   u64         rank (1 for signals, 2 otherwise)
//   u64[rank]   sample counts (x first)
//   f64[rank]   window extents L per axis
//   payload     'S'/'F': interleaved re/im f64, x-major
//               'M': u64 run count, then u64 run lengths alternating
//                    false/true, starting with a (possibly empty) false run
//
// All integers and floats are little-endian.
namespace stftlab::io {

struct MaskBlob {
  TFGrid grid;
  std::vector<std::uint8_t> inside;
};

using Container = std::variant<Signal, TFField, MaskBlob>;

void write_container(std::ostream& out, const Container& item);
Container read_container(std::istream& in);

void save(const std::filesystem::path& path, const Container& item);
Container load(const std::filesystem::path& path);

Signal load_signal(const std::filesystem::path& path);
TFField load_field(const std::filesystem::path& path);

/// Run lengths alternating false/true, first run false.
std::vector<std::uint64_t> run_length_encode(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> run_length_decode(const std::vector<std::uint64_t>& runs, std::size_t n);

/// CSV "x,re,im" with 17 significant digits.
void write_signal_csv(std::ostream& out, const Signal& f);

/// Shortest round-trippable decimal text for a double.
std::string format_double(double v);

}  // namespace stftlab::io
