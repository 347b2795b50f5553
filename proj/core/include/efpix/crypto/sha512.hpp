#pragma once

#include <initializer_list>

#include "efpix/bytes.hpp"

namespace efpix {

Hash64 sha512(ByteSpan data);
Hash64 sha512(std::initializer_list<ByteSpan> parts);

}  // namespace efpix
