#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace contact_hybrid {

// Set of active constraint indices under the system's global ordering.
class ContactMode {
 public:
  static constexpr int kMaxConstraints = 64;

  ContactMode() = default;
  explicit ContactMode(std::uint64_t bits) : bits_(bits) {}
  ContactMode(std::initializer_list<int> indices) {
    for (int k : indices) bits_ |= bit(k);
  }
  static ContactMode from_indices(const std::vector<int>& indices) {
    ContactMode m;
    for (int k : indices) m.bits_ |= bit(k);
    return m;
  }

  std::uint64_t bits() const { return bits_; }
  bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }
  bool contains(int k) const { return (bits_ & bit(k)) != 0; }
  bool subset_of(ContactMode o) const { return (bits_ & ~o.bits_) == 0; }

  ContactMode with(int k) const { return ContactMode(bits_ | bit(k)); }
  ContactMode without(int k) const { return ContactMode(bits_ & ~bit(k)); }
  ContactMode operator|(ContactMode o) const { return ContactMode(bits_ | o.bits_); }
  ContactMode operator&(ContactMode o) const { return ContactMode(bits_ & o.bits_); }
  ContactMode operator-(ContactMode o) const { return ContactMode(bits_ & ~o.bits_); }
  bool operator==(const ContactMode&) const = default;

  // Ascending global order.
  std::vector<int> indices() const {
    std::vector<int> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  // Position of k within indices(), or -1.
  int position(int k) const {
    if (!contains(k)) return -1;
    return std::popcount(bits_ & (bit(k) - 1));
  }

 private:
  static std::uint64_t bit(int k) { return std::uint64_t{1} << k; }
  std::uint64_t bits_ = 0;
};

}  // namespace contact_hybrid
