#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ratchet/errors.hpp"
#include "ratchet/text_format.hpp"

namespace ratchet {

/// CSV with a fixed column order, '.' decimal separator, '\n' line endings
/// and 17-significant-digit floats, so reruns are byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((render(values, first), first = false), ...);
    out_ << '\n';
  }

 private:
  void render(double v, bool first) {
    if (!first) out_ << ',';
    out_ << format_double(v);
  }
  void render(bool v, bool first) {
    if (!first) out_ << ',';
    out_ << (v ? 1 : 0);
  }
  void render(const std::string& v, bool first) {
    if (!first) out_ << ',';
    out_ << v;
  }
  void render(const char* v, bool first) {
    if (!first) out_ << ',';
    out_ << v;
  }
  template <class T>
  void render(T v, bool first) {
    if (!first) out_ << ',';
    out_ << v;
  }

  std::ofstream out_;
};

}  // namespace ratchet
