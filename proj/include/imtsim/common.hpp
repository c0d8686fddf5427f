/*
 * Copyright 2026 The imtsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace imtsim {

using Cycles = std::uint64_t;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, hardware or cost description violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The workload does not fit the hardware in any permitted residency mode.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text (syntax, unknown keys, wrong types).
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return (a + b - 1) / b;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, std::string_view what = "value") {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(std::string(what) + ": 64-bit overflow");
  }
  return out;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, std::string_view what = "value") {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(std::string(what) + ": 64-bit overflow");
  }
  return out;
}

// FNV-1a, used for config fingerprints. std::hash is not stable across builds.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline bool is_supported_bit_width(std::uint32_t bits) {
  return bits == 1 || bits == 2 || bits == 4 || bits == 8 || bits == 16;
}

}  // namespace imtsim
