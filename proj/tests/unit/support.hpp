#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "callmask/error.hpp"

inline std::string fixture_path(const std::string& name) { return std::string(CALLMASK_FIXTURES) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string read_fixture(const std::string& name) { return read_file(fixture_path(name)); }

// Runs `fn` and returns the ErrorCode it throws; fails the test when it does not throw.
template <class Fn>
callmask::ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const callmask::Error& e) {
    return e.code();
  }
  FAIL("expected callmask::Error");
  return callmask::ErrorCode::InvalidArgument;
}

inline std::string random_word(std::mt19937_64& rng, std::string_view alphabet, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string w;
  for (std::size_t n = len(rng); n > 0; --n) w += alphabet[pick(rng)];
  return w;
}
