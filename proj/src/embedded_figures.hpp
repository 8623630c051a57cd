#pragma once

#include <cstddef>

namespace ideval::detail {

// Raw fixture files, generated at build time from data/figures.
struct EmbeddedFigure {
  int id;
  const char* meta;
  const char* hist;
  const char* base;
  const char* exp;
  const char* ideal;
  const char* expected;
};

extern const EmbeddedFigure kEmbeddedFigures[];
extern const std::size_t kEmbeddedFigureCount;

}  // namespace ideval::detail
