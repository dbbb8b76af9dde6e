#include "loopbound/sobol.hpp"

#include <bit>

#include "loopbound/errors.hpp"
#include "loopbound/rng.hpp"

namespace loopbound {
namespace {

constexpr int kBits = 32;

struct Primitive {
  std::uint32_t poly;  // includes leading and trailing coefficient
  std::uint32_t init[8];
};

// First 40 dimensions of the new-joe-kuo-6.21201 table.
constexpr Primitive kTable[ScrambledSobol::kMaxDimension] = {
    {1, {1}},
    {3, {1}},
    {7, {1, 3}},
    {11, {1, 3, 1}},
    {13, {1, 1, 1}},
    {19, {1, 1, 3, 3}},
    {25, {1, 3, 5, 13}},
    {37, {1, 1, 5, 5, 17}},
    {41, {1, 1, 5, 5, 5}},
    {47, {1, 1, 7, 11, 19}},
    {55, {1, 1, 5, 1, 1}},
    {59, {1, 1, 1, 3, 11}},
    {61, {1, 3, 5, 5, 31}},
    {67, {1, 3, 3, 9, 7, 49}},
    {91, {1, 1, 1, 15, 21, 21}},
    {97, {1, 3, 1, 13, 27, 49}},
    {103, {1, 1, 1, 15, 7, 5}},
    {109, {1, 3, 1, 15, 13, 25}},
    {115, {1, 1, 5, 5, 19, 61}},
    {131, {1, 3, 7, 11, 23, 15, 103}},
    {137, {1, 3, 7, 13, 13, 15, 69}},
    {143, {1, 1, 3, 13, 7, 35, 63}},
    {145, {1, 3, 5, 9, 1, 25, 53}},
    {157, {1, 3, 1, 13, 9, 35, 107}},
    {167, {1, 3, 1, 5, 27, 61, 31}},
    {171, {1, 1, 5, 11, 19, 41, 61}},
    {185, {1, 3, 5, 3, 3, 13, 69}},
    {191, {1, 1, 7, 13, 1, 19, 1}},
    {193, {1, 3, 7, 5, 13, 19, 59}},
    {203, {1, 1, 3, 9, 25, 29, 41}},
    {211, {1, 3, 5, 13, 23, 1, 55}},
    {213, {1, 3, 7, 3, 13, 59, 17}},
    {229, {1, 3, 1, 3, 5, 53, 69}},
    {239, {1, 1, 5, 5, 23, 33, 13}},
    {241, {1, 1, 7, 7, 1, 61, 123}},
    {247, {1, 1, 7, 9, 13, 61, 49}},
    {253, {1, 3, 3, 5, 3, 55, 33}},
    {285, {1, 3, 1, 15, 31, 13, 49, 245}},
    {299, {1, 3, 5, 15, 31, 59, 63, 97}},
    {301, {1, 3, 1, 11, 11, 11, 77, 249}},
};

std::vector<std::uint32_t> raw_directions(int coord) {
  std::vector<std::uint32_t> v(kBits);
  const std::uint32_t poly = kTable[coord].poly;
  const int degree = std::bit_width(poly) - 1;
  if (degree <= 0) {
    for (int j = 0; j < kBits; ++j) v[j] = 1;
  } else {
    for (int j = 0; j < degree; ++j) v[j] = kTable[coord].init[j];
    for (int j = degree; j < kBits; ++j) {
      std::uint32_t next = v[j - degree];
      std::uint32_t pow2 = 1;
      for (int k = 0; k < degree; ++k) {
        pow2 <<= 1;
        if ((poly >> (degree - 1 - k)) & 1u) next ^= pow2 * v[j - k - 1];
      }
      v[j] = next;
    }
  }
  for (int j = 0; j < kBits; ++j) v[j] <<= (kBits - 1 - j);
  return v;
}

// Lower-triangular scramble in digit order (digit 0 = most significant bit).
std::uint32_t apply_scramble(const std::uint32_t* rows, std::uint32_t x) {
  std::uint32_t y = 0;
  for (int k = 0; k < kBits; ++k) {
    const std::uint32_t bit = std::popcount(rows[k] & x) & 1u;
    y |= bit << (kBits - 1 - k);
  }
  return y;
}

}  // namespace

ScrambledSobol::ScrambledSobol(int dimension, std::uint64_t seed, std::uint64_t replicate)
    : dim_(dimension), direction_(static_cast<std::size_t>(kBits) * dimension), shift_(dimension) {
  if (dimension < 1 || dimension > kMaxDimension) {
    throw PreconditionError("ScrambledSobol: dimension out of range");
  }
  Philox4x32 rng(seed, 0x50B0'0000'0000'0000ull + replicate);
  std::uint32_t rows[kBits];
  for (int i = 0; i < dimension; ++i) {
    for (int k = 0; k < kBits; ++k) {
      const std::uint32_t diag = 1u << (kBits - 1 - k);
      const std::uint32_t above = k == 0 ? 0u : ~((diag << 1) - 1u);
      rows[k] = (rng() & above) | diag;
    }
    const auto raw = raw_directions(i);
    for (int j = 0; j < kBits; ++j) {
      direction_[static_cast<std::size_t>(j) * dim_ + i] = apply_scramble(rows, raw[j]);
    }
    shift_[i] = rng();
  }
}

void ScrambledSobol::bits_of(std::uint64_t index, std::uint32_t* out) const {
  for (int i = 0; i < dim_; ++i) out[i] = shift_[i];
  std::uint64_t gray = index ^ (index >> 1);
  for (int j = 0; gray != 0 && j < kBits; ++j, gray >>= 1) {
    if (gray & 1u) {
      const std::uint32_t* row = &direction_[static_cast<std::size_t>(j) * dim_];
      for (int i = 0; i < dim_; ++i) out[i] ^= row[i];
    }
  }
}

void ScrambledSobol::point(std::uint64_t index, std::span<double> out) const {
  std::vector<std::uint32_t> bits(dim_);
  bits_of(index, bits.data());
  for (int i = 0; i < dim_; ++i) out[i] = to_unit(bits[i]);
}

ScrambledSobol::Cursor::Cursor(const ScrambledSobol& gen, std::uint64_t index)
    : gen_(&gen), index_(index), bits_(gen.dim_), coords_(gen.dim_) {
  gen.bits_of(index, bits_.data());
  for (int i = 0; i < gen.dim_; ++i) coords_[i] = to_unit(bits_[i]);
}

void ScrambledSobol::Cursor::advance() {
  ++index_;
  const int j = std::countr_zero(index_);
  const std::uint32_t* row = &gen_->direction_[static_cast<std::size_t>(j) * gen_->dim_];
  for (int i = 0; i < gen_->dim_; ++i) {
    bits_[i] ^= row[i];
    coords_[i] = to_unit(bits_[i]);
  }
}

}  // namespace loopbound
