#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lfz/core/error.hpp"

namespace lfz::jpeg {

enum class ChromaSubsampling { s444, s420 };

inline ChromaSubsampling parse_subsampling(std::string_view s) {
  if (s == "444" || s == "4:4:4") return ChromaSubsampling::s444;
  if (s == "420" || s == "4:2:0") return ChromaSubsampling::s420;
  throw UsageError("unknown chroma subsampling '" + std::string(s) + "'");
}

struct JpegConfig {
  int quality = 50;
  ChromaSubsampling chroma_subsampling = ChromaSubsampling::s420;
  unsigned restart_interval = 0;  // MCUs between restart markers, 0 = none

  void validate() const {
    if (quality < 1 || quality > 100)
      throw UsageError("JPEG quality must be in [1,100], got " + std::to_string(quality));
    if (restart_interval > 0xFFFF) throw UsageError("restart interval exceeds 65535");
  }
};

/// An interchange-format JPEG stream (SOI ... EOI).
using JpegBytes = std::vector<std::uint8_t>;

}  // namespace lfz::jpeg
