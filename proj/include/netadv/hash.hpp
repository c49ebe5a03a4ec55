#ifndef NETADV_HASH_HPP
#define NETADV_HASH_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace netadv {

class Fnv1a {
 public:
  void update(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }

  void update(const std::string& s) { update(s.data(), s.size()); }

  void update(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    update(&bits, sizeof(bits));
  }

  void update(const std::vector<double>& v) {
    for (double x : v) update(x);
  }

  std::uint64_t value() const { return state_; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
      out[i] = digits[v & 0xf];
      v >>= 4;
    }
    return out;
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace netadv

#endif  // NETADV_HASH_HPP
