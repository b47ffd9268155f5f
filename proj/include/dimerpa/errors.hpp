// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dimerpa {

enum class ErrorCode : int {
  invalid_argument = 2,
  schema = 3,
  unreachable = 4,
  solver = 5,
  io = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::schema: return "schema";
    case ErrorCode::unreachable: return "unreachable";
    case ErrorCode::solver: return "solver";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorCode c, const std::string& what) { throw Error(c, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace dimerpa
