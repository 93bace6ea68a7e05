#pragma once

#include <memory>
#include <thread>

#include "service/config.hpp"

namespace httplib {
class Server;
}

namespace dcmsg::service {

// HTTP front end over a SessionManager. Routes live under /v1; /healthz is
// also served at the root.
class Service {
 public:
  // Loads (or synthesizes) the dataset, opens the repository and recovers
  // sessions from the journal directory.
  explicit Service(const ServiceConfig& config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds host:port; port 0 picks a free port. Returns the bound port.
  int bind(int port);
  int bind() { return bind(config_.port); }

  void run();    // blocks until stop()
  void start();  // runs on a background thread
  void stop();

  std::size_t recovered_sessions() const { return recovered_; }
  session::SessionManager& manager() { return *manager_; }

 private:
  void routes();

  ServiceConfig config_;
  std::unique_ptr<session::SessionManager> manager_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::size_t recovered_ = 0;
};

// Dataset name sessions use unless they ask for another one.
inline constexpr const char* kDefaultDataset = "default";

// HTTP status for an error code.
int http_status(ErrorCode code);

}  // namespace dcmsg::service
