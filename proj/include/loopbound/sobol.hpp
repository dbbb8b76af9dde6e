#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace loopbound {

/// Sobol low-discrepancy sequence (Joe-Kuo direction numbers) with random
/// linear matrix scrambling and a random digital shift.
///
/// Each (seed, replicate) pair selects an independent scrambling; the
/// spread of replicate estimates gives the QMC error bar. Points are
/// enumerated in Gray-code order, so any prefix of length 2^m is a full
/// (t, m, s)-net.
class ScrambledSobol {
 public:
  static constexpr int kMaxDimension = 40;

  ScrambledSobol(int dimension, std::uint64_t seed, std::uint64_t replicate);

  int dimension() const noexcept { return dim_; }

  /// Coordinates of the Gray-code-ordered point `index`, in (0, 1).
  void point(std::uint64_t index, std::span<double> out) const;

  /// Sequential walker starting at an arbitrary index.
  class Cursor {
   public:
    Cursor(const ScrambledSobol& gen, std::uint64_t index);
    std::span<const double> current() const noexcept { return coords_; }
    void advance();

   private:
    const ScrambledSobol* gen_;
    std::uint64_t index_;
    std::vector<std::uint32_t> bits_;
    std::vector<double> coords_;
  };

 private:
  void bits_of(std::uint64_t index, std::uint32_t* out) const;
  static double to_unit(std::uint32_t bits) noexcept {
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-32;
  }

  int dim_;
  // direction_[j * dim_ + i]: scrambled direction number j of coordinate i
  std::vector<std::uint32_t> direction_;
  std::vector<std::uint32_t> shift_;
};

}  // namespace loopbound
