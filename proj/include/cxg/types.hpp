#pragma once

#include <cstdint>

namespace cxg {

using SentenceId = std::uint32_t;
using ArticleId = std::uint32_t;
using CxgId = std::uint32_t;

}  // namespace cxg
