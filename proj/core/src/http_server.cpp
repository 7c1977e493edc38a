#include "arise/http_server.hpp"

#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "arise/errors.hpp"

namespace arise {

struct HttpServer::Impl {
  httplib::Server server;
};

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

HttpServer::HttpServer(Service& service) : service_(service), impl_(std::make_unique<Impl>()) {
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [name, value] : req.params) api.query.emplace(name, value);
    for (const auto& [name, value] : req.headers) api.headers.emplace(lowercase(name), value);
    api.body = req.body;
    const auto out = service_.handle(api);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  // Only SO_REUSEADDR: the library default also sets SO_REUSEPORT, which
  // would let a second server share a port that is already taken.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  const std::string any = R"(/.*)";
  impl_->server.Get(any, forward);
  impl_->server.Post(any, forward);
  impl_->server.Put(any, forward);
  impl_->server.Delete(any, forward);
  impl_->server.Patch(any, forward);
}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::start(const std::string& host, std::uint16_t port) {
  int bound = 0;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else {
    bound = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (bound <= 0) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
  port_ = static_cast<std::uint16_t>(bound);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void HttpServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace arise
