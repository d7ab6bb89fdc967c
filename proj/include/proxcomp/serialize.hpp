#pragma once

#include <string>

#include "proxcomp/error.hpp"
#include "proxcomp/expr.hpp"
#include "proxcomp/separate.hpp"

namespace proxcomp {

// Text form of a program plus the sidecar holding variable shapes and
// constant data.
//
// Sidecar layout, one record per declaration:
//   var <name> <rows> <cols>
//   const <name> <rows> <cols>      followed by <rows> lines of row-major values
//   sparse <name> <rows> <cols> <nnz> followed by <nnz> lines "<row> <col> <value>"
struct Serialized {
  std::string text;
  std::string data;
};

class ParseError : public UserError {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

Serialized serialize(const ProxAffineProblem& p);
Serialized serialize(const SeparableProblem& p);
// Problem files: nonlinear atoms are kept, linear atoms are written as maps.
Serialized serialize(const Problem& p);

ProxAffineProblem parse_prox_affine(const std::string& text, const std::string& data);
SeparableProblem parse_separable(const std::string& text, const std::string& data);
Problem parse_problem(const std::string& text, const std::string& data);

// Number formatting used throughout the text form.
std::string format_number(double v);

// <path> holds the text and <path>.data the sidecar.
void write_files(const std::string& path, const Serialized& s);
Serialized read_files(const std::string& path);

}  // namespace proxcomp
