#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dcmsg::csv {

// Minimal RFC-4180 reader/writer: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> parse(std::string_view text);

std::string escape(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

}  // namespace dcmsg::csv
