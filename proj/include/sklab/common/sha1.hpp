#pragma once

#include <cstdint>
#include <string>

namespace sklab {

// SHA-1 hex digest; used for manifest content hashes and output-file
// integrity checks (resume support).
std::string sha1_hex(const void* data, std::size_t n);
std::string sha1_hex(const std::string& s);
std::string sha1_file(const std::string& path);  // empty on read failure

}  // namespace sklab
