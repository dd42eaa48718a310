#ifndef CLUSTERKIT_HASHING_HPP
#define CLUSTERKIT_HASHING_HPP

#include <cstdint>
#include <cstring>
#include <string_view>

namespace clusterkit {

/// 64-bit FNV-1a, incremental.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& text(std::string_view s) { return bytes(s.data(), s.size()); }
  template <class T>
  Fnv1a& value(const T& v) {
    return bytes(&v, sizeof v);
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace clusterkit

#endif  // CLUSTERKIT_HASHING_HPP
