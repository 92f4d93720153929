#pragma once

#include <string>
#include <vector>

namespace tmkit {

enum class Severity { Error, Warning };

/// One finding from the parser or the validator. `line`/`col` are 1-based
/// for source-backed findings and 0 for model-level findings.
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  int line = 0;
  int col = 0;
  std::string message;
};

struct Diagnostics {
  std::vector<Diagnostic> items;

  void error(std::string code, std::string message, int line = 0, int col = 0) {
    items.push_back({Severity::Error, std::move(code), line, col, std::move(message)});
  }
  void warning(std::string code, std::string message, int line = 0, int col = 0) {
    items.push_back({Severity::Warning, std::move(code), line, col, std::move(message)});
  }
  void append(const Diagnostics& other) {
    items.insert(items.end(), other.items.begin(), other.items.end());
  }

  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& d : items) {
      if (d.severity == Severity::Error) ++n;
    }
    return n;
  }
  std::size_t warning_count() const { return items.size() - error_count(); }
  bool ok() const { return error_count() == 0; }

  bool has_code(const std::string& code) const {
    for (const auto& d : items) {
      if (d.code == code) return true;
    }
    return false;
  }
};

}  // namespace tmkit
