// UTF-8 <-> Unicode scalar value conversion. All character counts and
// offsets in evnet are in scalar values, never bytes.

#ifndef EVNET_UTF8_H_
#define EVNET_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace evnet::utf8 {

// Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view chars);

// Number of scalar values in a UTF-8 string.
size_t length(std::string_view bytes);

// Substring by scalar-value offsets, [begin, end).
std::string substr(std::string_view bytes, size_t begin, size_t end);

}  // namespace evnet::utf8

#endif  // EVNET_UTF8_H_
