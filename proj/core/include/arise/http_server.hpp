#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "arise/service.hpp"

namespace arise {

// HTTP front of a Service. Every request is forwarded to Service::handle.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Returns the bound port; throws ConfigError when binding fails.
  std::uint16_t start(const std::string& host, std::uint16_t port);
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  std::uint16_t port() const noexcept { return port_; }

 private:
  struct Impl;
  Service& service_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::uint16_t port_ = 0;
};

}  // namespace arise
