#pragma once

#include <stdexcept>
#include <string>

#include "vlcsee/conic/program.hpp"

namespace vlcsee::conic {

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

/// Human-readable dump. Coefficients are printed with enough digits that
/// parse_program(to_text(p)) == p.
std::string to_text(const ConicProgram& program);

ConicProgram parse_program(const std::string& text);

}  // namespace vlcsee::conic
