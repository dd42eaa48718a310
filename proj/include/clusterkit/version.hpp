#ifndef CLUSTERKIT_VERSION_HPP
#define CLUSTERKIT_VERSION_HPP

namespace clusterkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace clusterkit

#endif  // CLUSTERKIT_VERSION_HPP
