#include <fstream>
#include <iterator>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "arise/artworks.hpp"
#include "arise/errors.hpp"

namespace arise::artworks {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw GenerationError("generator url lacks a scheme: " + url);
  const auto path_at = url.find('/', scheme_end + 3);
  if (path_at == std::string::npos) return {url, "/"};
  return {url.substr(0, path_at), url.substr(path_at)};
}

}  // namespace

HttpGenerator::HttpGenerator(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

std::vector<std::uint8_t> HttpGenerator::render(const ArtPrompt& prompt) {
  std::ifstream photo(prompt.base_photo, std::ios::binary);
  if (!photo) throw GenerationError("cannot read base photo " + prompt.base_photo.string());
  const std::vector<std::uint8_t> photo_bytes{std::istreambuf_iterator<char>(photo), {}};

  const nlohmann::json body{
      {"prompt_text", prompt.prompt_text},
      {"seed", prompt.seed},
      {"base_photo_b64", base64_encode(photo_bytes)},
  };

  const Endpoint ep = split_url(url_);
  httplib::Client client(ep.origin);
  if (!client.is_valid()) throw GenerationError("unsupported generator url: " + url_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto res = client.Post(ep.path, body.dump(), "application/json");
  if (!res) {
    throw GenerationError("generator at " + url_ + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw GenerationError("generator at " + url_ + " answered HTTP " + std::to_string(res->status));
  }
  return {res->body.begin(), res->body.end()};
}

}  // namespace arise::artworks
