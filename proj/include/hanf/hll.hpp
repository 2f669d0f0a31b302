#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hanf/error.hpp"

namespace hanf {

// splitmix64 output function with state (item ^ seed). Fixed so that sketches
// built on different platforms agree register for register.
[[nodiscard]] constexpr std::uint64_t hash64(std::uint64_t item, std::uint64_t seed) noexcept {
  std::uint64_t z = (item ^ seed) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// HyperLogLog sketch over 64-bit items: 2^b byte registers, each holding the
// maximum rank observed among items hashed to it.
class HllSketch {
public:
  static constexpr unsigned min_log2 = 4;
  static constexpr unsigned max_log2 = 16;

  HllSketch(unsigned b, std::uint64_t seed) : b_(b), seed_(seed) {
    if (b < min_log2 || b > max_log2) {
      fail(errc::parameter, "register exponent b=" + std::to_string(b) + " outside [4, 16]");
    }
    registers_.assign(std::size_t{1} << b, 0);
  }

  [[nodiscard]] unsigned log2_registers() const noexcept { return b_; }
  [[nodiscard]] std::size_t size() const noexcept { return registers_.size(); }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::span<const std::uint8_t> registers() const noexcept { return registers_; }

  // Largest rank a register can hold: all 64-b suffix bits zero.
  [[nodiscard]] std::uint8_t max_rank() const noexcept { return static_cast<std::uint8_t>(64 - b_ + 1); }

  [[nodiscard]] bool compatible(const HllSketch& other) const noexcept {
    return b_ == other.b_ && seed_ == other.seed_;
  }

  void add(std::uint64_t item) noexcept {
    const std::uint64_t x = hash64(item, seed_);
    const std::size_t j = static_cast<std::size_t>(x >> (64 - b_));
    const std::uint64_t suffix = x << b_;
    const auto rank = suffix == 0 ? max_rank() : static_cast<std::uint8_t>(std::countl_zero(suffix) + 1);
    registers_[j] = std::max(registers_[j], rank);
  }

  void merge(const HllSketch& other) {
    if (!compatible(other)) {
      fail(errc::incompatible_sketch, "cannot union sketches with different b or seed");
    }
    auto* dst = registers_.data();
    const auto* src = other.registers_.data();
    for (std::size_t j = 0, k = registers_.size(); j < k; ++j) {
      dst[j] = std::max(dst[j], src[j]);
    }
  }

  // Bias-correction constant alpha_k for k = 2^b registers.
  [[nodiscard]] static double alpha(std::size_t k) noexcept {
    switch (k) {
    case 16: return 0.673;
    case 32: return 0.697;
    case 64: return 0.709;
    default: return 0.7213 / (1.0 + 1.079 / static_cast<double>(k));
    }
  }

  [[nodiscard]] double raw_estimate() const noexcept {
    const auto k = static_cast<double>(registers_.size());
    double harmonic = 0.0;
    for (auto r : registers_) {
      harmonic += std::ldexp(1.0, -static_cast<int>(r));
    }
    return alpha(registers_.size()) * k * k / harmonic;
  }

  [[nodiscard]] std::size_t zero_registers() const noexcept {
    return static_cast<std::size_t>(std::count(registers_.begin(), registers_.end(), std::uint8_t{0}));
  }

  // Raw estimate, switched to linear counting at small cardinalities.
  // No large-range correction: 64-bit hashes.
  [[nodiscard]] double estimate() const noexcept {
    const auto k = static_cast<double>(registers_.size());
    const double raw = raw_estimate();
    const auto zeros = zero_registers();
    if (raw <= 2.5 * k && zeros > 0) {
      return k * std::log(k / static_cast<double>(zeros));
    }
    return raw;
  }

  // Wire layout: b (1 byte), seed (8 bytes little-endian), registers (k bytes).
  void serialize(std::vector<std::uint8_t>& out) const {
    out.push_back(static_cast<std::uint8_t>(b_));
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<std::uint8_t>(seed_ >> (8 * i)));
    }
    out.insert(out.end(), registers_.begin(), registers_.end());
  }

  [[nodiscard]] static HllSketch deserialize(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr) {
    if (bytes.size() < 9) {
      fail(errc::parse, "truncated sketch header");
    }
    const unsigned b = bytes[0];
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) {
      seed |= static_cast<std::uint64_t>(bytes[1 + i]) << (8 * i);
    }
    HllSketch s(b, seed);
    if (bytes.size() < 9 + s.size()) {
      fail(errc::parse, "truncated sketch registers");
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (bytes[9 + j] > s.max_rank()) {
        fail(errc::parse, "register value out of range");
      }
      s.registers_[j] = bytes[9 + j];
    }
    if (consumed != nullptr) {
      *consumed = 9 + s.size();
    }
    return s;
  }

  friend bool operator==(const HllSketch&, const HllSketch&) = default;

private:
  unsigned b_;
  std::uint64_t seed_;
  std::vector<std::uint8_t> registers_;
};

// Exact distinct-set counter with the same interface as HllSketch. Members are
// kept sorted and unique.
class ExactCounter {
public:
  ExactCounter() = default;

  void add(std::uint64_t item) {
    auto it = std::lower_bound(members_.begin(), members_.end(), item);
    if (it == members_.end() || *it != item) {
      members_.insert(it, item);
    }
  }

  void merge(const ExactCounter& other) {
    if (other.members_.empty()) {
      return;
    }
    std::vector<std::uint64_t> merged;
    merged.reserve(members_.size() + other.members_.size());
    std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                   std::back_inserter(merged));
    members_ = std::move(merged);
  }

  [[nodiscard]] double estimate() const noexcept { return static_cast<double>(members_.size()); }
  [[nodiscard]] std::span<const std::uint64_t> members() const noexcept { return members_; }

  friend bool operator==(const ExactCounter&, const ExactCounter&) = default;

private:
  std::vector<std::uint64_t> members_;
};

struct HyperLogLogKind {
  unsigned b = 8;
  std::uint64_t seed = 0;
  friend bool operator==(const HyperLogLogKind&, const HyperLogLogKind&) = default;
};

struct ExactKind {
  friend bool operator==(const ExactKind&, const ExactKind&) = default;
};

// Counters that take part in one computation must share a kind.
using CounterKind = std::variant<HyperLogLogKind, ExactKind>;

inline std::string to_string(const CounterKind& kind) {
  if (const auto* h = std::get_if<HyperLogLogKind>(&kind)) {
    return "hyperloglog(b=" + std::to_string(h->b) + ",seed=" + std::to_string(h->seed) + ")";
  }
  return "exact";
}

// A set-size counter of either kind.
class Counter {
public:
  explicit Counter(HllSketch s) : impl_(std::move(s)) {}
  explicit Counter(ExactCounter s) : impl_(std::move(s)) {}

  [[nodiscard]] bool is_exact() const noexcept { return std::holds_alternative<ExactCounter>(impl_); }
  [[nodiscard]] const HllSketch* sketch() const noexcept { return std::get_if<HllSketch>(&impl_); }
  [[nodiscard]] const ExactCounter* exact() const noexcept { return std::get_if<ExactCounter>(&impl_); }

  void add(std::uint64_t item) {
    std::visit([item](auto& c) { c.add(item); }, impl_);
  }

  void merge(const Counter& other) {
    if (impl_.index() != other.impl_.index()) {
      fail(errc::incompatible_sketch, "cannot union an exact counter with a sketch");
    }
    std::visit(
        [&other](auto& c) {
          using T = std::decay_t<decltype(c)>;
          c.merge(std::get<T>(other.impl_));
        },
        impl_);
  }

  [[nodiscard]] double estimate() const {
    return std::visit([](const auto& c) { return c.estimate(); }, impl_);
  }

  friend bool operator==(const Counter&, const Counter&) = default;

private:
  std::variant<HllSketch, ExactCounter> impl_;
};

[[nodiscard]] inline Counter counter_init(const CounterKind& kind, std::optional<std::uint64_t> member = std::nullopt) {
  Counter c = std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, HyperLogLogKind>) {
          return Counter(HllSketch(k.b, k.seed));
        } else {
          return Counter(ExactCounter{});
        }
      },
      kind);
  if (member) {
    c.add(*member);
  }
  return c;
}

[[nodiscard]] inline Counter counter_union(Counter a, const Counter& c) {
  a.merge(c);
  return a;
}

} // namespace hanf
