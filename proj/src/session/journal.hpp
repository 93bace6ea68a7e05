#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

namespace dcmsg::session {

// Append-only JSON-lines file; each record is flushed before append returns.
class Journal {
 public:
  explicit Journal(std::filesystem::path path);

  void append(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

// A torn final line (crash mid-write) is ignored; any other bad line throws
// MalformedFile.
std::vector<nlohmann::json> read_journal(const std::filesystem::path& path);

}  // namespace dcmsg::session
