#pragma once

#include <cstdint>
#include <string_view>

namespace nvtwin {

std::uint64_t splitmix64(std::uint64_t x);

// Stable substream seed for (master, label, index); independent of thread scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace nvtwin
