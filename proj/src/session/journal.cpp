#include "session/journal.hpp"

#include "common/errors.hpp"

namespace dcmsg::session {

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) fail(ErrorCode::Io, "cannot open journal " + path_.string());
}

void Journal::append(const nlohmann::json& record) {
  std::lock_guard lock(mutex_);
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) fail(ErrorCode::Io, "journal write failed for " + path_.string());
}

std::vector<nlohmann::json> read_journal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read journal " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(std::move(line));
  std::vector<nlohmann::json> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      records.push_back(nlohmann::json::parse(lines[i]));
    } catch (const nlohmann::json::exception& e) {
      if (i + 1 == lines.size()) break;
      fail(ErrorCode::MalformedFile, path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace dcmsg::session
